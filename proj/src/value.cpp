#include "cao/value.hpp"

#include <sstream>

namespace cao {

Rational Value::as_rat() const {
    if (is_int()) return Rational(as_int());
    return std::get<Rational>(v);
}

Value normalize_number(const Rational& r) {
    if (boost::multiprecision::denominator(r) == 1) return Value(boost::multiprecision::numerator(r));
    return Value(r);
}

namespace {

int kind_rank(const Value& a) {
    if (a.is_unit()) return 0;
    if (a.is_bool()) return 1;
    if (a.is_num()) return 2;
    if (a.is_list()) return 3;
    if (a.is_object()) return 4;
    return 5;
}

}  // namespace

int compare(const Value& a, const Value& b) {
    int ka = kind_rank(a), kb = kind_rank(b);
    if (ka != kb) return ka < kb ? -1 : 1;
    switch (ka) {
    case 0: return 0;
    case 1: return a.as_bool() == b.as_bool() ? 0 : (a.as_bool() ? 1 : -1);
    case 2: {
        if (a.is_int() && b.is_int()) return a.as_int() < b.as_int() ? -1 : (a.as_int() == b.as_int() ? 0 : 1);
        Rational x = a.as_rat(), y = b.as_rat();
        return x < y ? -1 : (x == y ? 0 : 1);
    }
    case 3: {
        const auto& x = a.as_list();
        const auto& y = b.as_list();
        for (size_t i = 0; i < x.size() && i < y.size(); ++i)
            if (int c = compare(x[i], y[i])) return c;
        return x.size() < y.size() ? -1 : (x.size() == y.size() ? 0 : 1);
    }
    case 4: return a.as_object().compare(b.as_object()) < 0 ? -1 : (a.as_object() == b.as_object() ? 0 : 1);
    default: return a.as_future() < b.as_future() ? -1 : (a.as_future() == b.as_future() ? 0 : 1);
    }
}

bool operator==(const Value& a, const Value& b) { return compare(a, b) == 0; }

std::string rat_to_string(const Rational& r) {
    std::ostringstream os;
    os << boost::multiprecision::numerator(r);
    if (boost::multiprecision::denominator(r) != 1) os << "/" << boost::multiprecision::denominator(r);
    return os.str();
}

std::string to_string(const Value& v) {
    if (v.is_unit()) return "unit";
    if (v.is_bool()) return v.as_bool() ? "True" : "False";
    if (v.is_int()) return v.as_int().str();
    if (v.is_rat()) return rat_to_string(v.as_rat());
    if (v.is_list()) {
        std::string s = "[";
        const auto& xs = v.as_list();
        for (size_t i = 0; i < xs.size(); ++i) {
            if (i) s += ", ";
            s += to_string(xs[i]);
        }
        return s + "]";
    }
    if (v.is_object()) return v.as_object();
    if (v.as_future() == 0) return "Never";
    return "fut" + std::to_string(v.as_future());
}

std::optional<Value> apply_unary(const std::string& op, const Value& a) {
    if (op == "-") {
        if (a.is_int()) return Value(BigInt(-a.as_int()));
        if (a.is_rat()) return Value(Rational(-a.as_rat()));
        return std::nullopt;
    }
    if (op == "!") {
        if (a.is_bool()) return Value(!a.as_bool());
        return std::nullopt;
    }
    if (op == "len") {
        if (a.is_list()) return Value(BigInt(a.as_list().size()));
        return std::nullopt;
    }
    if (op == "hd") {
        if (a.is_list() && !a.as_list().empty()) return a.as_list().front();
        return std::nullopt;
    }
    if (op == "tl") {
        if (a.is_list() && !a.as_list().empty()) return Value(ValueList(a.as_list().begin() + 1, a.as_list().end()));
        return std::nullopt;
    }
    return std::nullopt;
}

std::optional<Value> apply_binary(const std::string& op, const Value& a, const Value& b) {
    if (op == "&&" || op == "||") {
        if (!a.is_bool() || !b.is_bool()) return std::nullopt;
        return Value(op == "&&" ? (a.as_bool() && b.as_bool()) : (a.as_bool() || b.as_bool()));
    }
    if (op == "==") return Value(a == b);
    if (op == "!=") return Value(a != b);
    if (op == "Cons") {
        if (!b.is_list()) return std::nullopt;
        ValueList xs;
        xs.reserve(b.as_list().size() + 1);
        xs.push_back(a);
        xs.insert(xs.end(), b.as_list().begin(), b.as_list().end());
        return Value(std::move(xs));
    }
    if (op == "index") {
        // t[t]: zero-based list indexing, undefined out of range
        if (!a.is_list() || !b.is_int()) return std::nullopt;
        const auto& xs = a.as_list();
        if (b.as_int() < 0 || b.as_int() >= BigInt(xs.size())) return std::nullopt;
        return xs[static_cast<size_t>(b.as_int())];
    }
    if (!a.is_num() || !b.is_num()) return std::nullopt;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") {
        int c = compare(a, b);
        if (op == "<") return Value(c < 0);
        if (op == "<=") return Value(c <= 0);
        if (op == ">") return Value(c > 0);
        return Value(c >= 0);
    }
    if (a.is_int() && b.is_int()) {
        if (op == "+") return Value(BigInt(a.as_int() + b.as_int()));
        if (op == "-") return Value(BigInt(a.as_int() - b.as_int()));
        if (op == "*") return Value(BigInt(a.as_int() * b.as_int()));
    }
    Rational x = a.as_rat(), y = b.as_rat();
    if (op == "+") return Value(Rational(x + y));
    if (op == "-") return Value(Rational(x - y));
    if (op == "*") return Value(Rational(x * y));
    if (op == "/") {
        if (y == 0) return std::nullopt;
        return Value(Rational(x / y));
    }
    return std::nullopt;
}

}  // namespace cao
