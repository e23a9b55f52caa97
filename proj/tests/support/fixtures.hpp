#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kgwe/graph_store.hpp"

namespace kgwe::test {

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(KGWE_DATA_DIR) / name;
}

using Triple = std::array<std::string, 3>;

inline KnowledgeGraph graph_of(std::initializer_list<Triple> triples) {
    GraphBuilder builder;
    for (const auto& t : triples) builder.add(t[0], t[1], t[2]);
    return std::move(builder).build();
}

inline KnowledgeGraph graph_of(const std::vector<Triple>& triples) {
    GraphBuilder builder;
    for (const auto& t : triples) builder.add(t[0], t[1], t[2]);
    return std::move(builder).build();
}

// v0 -> v1 -> ... -> v(n-1), one predicate.
inline KnowledgeGraph chain_graph(int n) {
    std::vector<Triple> t;
    for (int i = 0; i + 1 < n; ++i)
        t.push_back({"v" + std::to_string(i), "next", "v" + std::to_string(i + 1)});
    return graph_of(t);
}

inline KnowledgeGraph cycle_graph(int n) {
    std::vector<Triple> t;
    for (int i = 0; i < n; ++i)
        t.push_back({"v" + std::to_string(i), "next", "v" + std::to_string((i + 1) % n)});
    return graph_of(t);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("kgwe-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace kgwe::test
