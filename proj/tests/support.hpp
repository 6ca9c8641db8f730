#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#ifndef CAO_CORPUS_DIR
#error "CAO_CORPUS_DIR must be defined by the build"
#endif
#ifndef CAO_BIN
#error "CAO_BIN must be defined by the build"
#endif

namespace testsupport {

inline std::string corpus(const std::string& name) { return std::string(CAO_CORPUS_DIR) + "/" + name; }

inline std::vector<std::string> corpus_programs() {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(CAO_CORPUS_DIR))
        if (e.path().extension() == ".cao") out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct CmdResult {
    int code = -1;
    std::string out;
};

// Runs the cao binary with the given argument string; stderr is discarded.
inline CmdResult cao(const std::string& args) {
    std::string cmd = std::string(CAO_BIN) + " " + args + " 2>/dev/null";
    CmdResult r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf{};
    size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

inline std::string write_temp(const std::string& name, const std::string& text) {
    auto dir = std::filesystem::temp_directory_path() / "cao_tests";
    std::filesystem::create_directories(dir);
    auto p = dir / name;
    std::ofstream(p) << text;
    return p.string();
}

}  // namespace testsupport
