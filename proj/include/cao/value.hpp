#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cao {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

struct UnitV {
    bool operator==(const UnitV&) const = default;
};
struct ObjName {
    std::string name;
    bool operator==(const ObjName&) const = default;
};
// id 0 is the unresolvable future Never
struct FutId {
    uint64_t id = 0;
    bool operator==(const FutId&) const = default;
};

struct Value;
using ValueList = std::vector<Value>;

// Ground semantic value.
struct Value {
    std::variant<UnitV, bool, BigInt, Rational, ValueList, ObjName, FutId> v;

    Value() : v(UnitV{}) {}
    template <class T>
    Value(T x) : v(std::move(x)) {}
    Value(int x) : v(BigInt(x)) {}
    Value(long x) : v(BigInt(x)) {}
    Value(long long x) : v(BigInt(x)) {}

    static Value unit() { return Value(UnitV{}); }
    static Value never() { return Value(FutId{0}); }
    static Value future(uint64_t id) { return Value(FutId{id}); }
    static Value object(std::string n) { return Value(ObjName{std::move(n)}); }
    static Value list(ValueList xs) { return Value(std::move(xs)); }

    bool is_unit() const { return std::holds_alternative<UnitV>(v); }
    bool is_bool() const { return std::holds_alternative<bool>(v); }
    bool is_int() const { return std::holds_alternative<BigInt>(v); }
    bool is_rat() const { return std::holds_alternative<Rational>(v); }
    bool is_num() const { return is_int() || is_rat(); }
    bool is_list() const { return std::holds_alternative<ValueList>(v); }
    bool is_object() const { return std::holds_alternative<ObjName>(v); }
    bool is_future() const { return std::holds_alternative<FutId>(v); }

    bool as_bool() const { return std::get<bool>(v); }
    const BigInt& as_int() const { return std::get<BigInt>(v); }
    Rational as_rat() const;  // ints promoted
    const ValueList& as_list() const { return std::get<ValueList>(v); }
    const std::string& as_object() const { return std::get<ObjName>(v).name; }
    uint64_t as_future() const { return std::get<FutId>(v).id; }
};

// Numeric equality across Int/Rat, structural otherwise.
bool operator==(const Value& a, const Value& b);
inline bool operator!=(const Value& a, const Value& b) { return !(a == b); }
// Total order used for canonical sets; consistent with ==.
int compare(const Value& a, const Value& b);

std::string to_string(const Value& v);
std::string rat_to_string(const Rational& r);

// Arithmetic/logic on ground values. nullopt = undefined (div by zero, type clash).
std::optional<Value> apply_binary(const std::string& op, const Value& a, const Value& b);
std::optional<Value> apply_unary(const std::string& op, const Value& a);

// Rational with integral value collapses back to Int.
Value normalize_number(const Rational& r);

}  // namespace cao
