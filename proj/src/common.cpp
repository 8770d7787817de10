#include "hlsdse/common.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>
#include <vector>

namespace hlsdse {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // Trim to the shortest representation that round-trips.
    for (int prec = 1; prec < 17; ++prec) {
        char probe[64];
        std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(probe, "%lf", &back);
        if (back == v) return probe;
    }
    return buf;
}

void parallel_chunks(std::size_t n_items, std::size_t chunk_size, int threads,
                     const std::function<void(int, std::size_t, std::size_t)>& fn) {
    if (n_items == 0) return;
    if (chunk_size == 0) chunk_size = n_items;
    const int n_chunks = static_cast<int>((n_items + chunk_size - 1) / chunk_size);
    const int workers = std::max(1, std::min(threads, n_chunks));
    if (workers == 1) {
        for (int c = 0; c < n_chunks; ++c)
            fn(c, c * chunk_size, std::min(n_items, (c + 1) * chunk_size));
        return;
    }
    std::atomic<int> next{0};
    auto work = [&] {
        for (;;) {
            const int c = next.fetch_add(1);
            if (c >= n_chunks) return;
            fn(c, c * chunk_size, std::min(n_items, (c + 1) * chunk_size));
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace hlsdse
