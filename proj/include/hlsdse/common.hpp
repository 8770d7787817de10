// common.hpp — shared error types and small utilities
#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hlsdse {

// Malformed or version-mismatched input files.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Source-level problems reported by the frontend.
struct ParseError : std::runtime_error {
    ParseError(std::string msg, int line, int col)
        : std::runtime_error(std::move(msg)), line(line), col(col) {}
    int line;
    int col;
};

struct UnsupportedConstructError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Runs fn(chunk, lo, hi) over fixed-size chunks of [0, n_items), using up to
// `threads` workers. Chunk boundaries depend only on (n_items, chunk_size),
// so per-chunk results are reproducible; callers combine them in chunk order.
void parallel_chunks(std::size_t n_items, std::size_t chunk_size, int threads,
                     const std::function<void(int, std::size_t, std::size_t)>& fn);

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Fixed formatting for doubles in text outputs. Round-trips exactly and is
// byte-stable for identical inputs.
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace hlsdse
