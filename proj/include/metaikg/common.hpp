#pragma once

// Shared plumbing: error taxonomy, deterministic RNG, hashing, byte-order
// helpers and a slot-based parallel loop.
//
// Determinism rules used throughout the project:
//  - all randomness flows through Rng (mt19937_64 core with hand-rolled
//    uniform mappings; std::uniform_* distributions are implementation
//    defined and would break the bit-identical-checkpoint contract),
//  - parallel work writes into per-index slots and is reduced sequentially
//    in index order, so thread count never changes results.

#include <atomic>
#include <cstdint>
#include <cstring>
#include <functional>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace metaikg {

// User-addressable mistakes in flags/config files. CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data. CLI exit code 3.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// splitmix64 finalizer; used to derive independent seeds from a base seed.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t hash_mix(std::initializer_list<uint64_t> vs) {
    uint64_t h = 0x2545f4914f6cdd1dull;
    for (uint64_t v : vs) h = mix64(h ^ v);
    return h;
}

inline uint64_t fnv1a64(std::string_view s, uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// mt19937_64 with portable uniform mappings and string-serializable state.
class Rng {
  public:
    explicit Rng(uint64_t seed = 0) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // [0, 1) with 53 random bits.
    double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

    // [0, n). Lemire multiply-shift; deterministic, bias < 2^-64 per draw.
    uint64_t below(uint64_t n) {
        return uint64_t((static_cast<unsigned __int128>(gen_()) * n) >> 64);
    }

    bool coin() { return (gen_() >> 63) != 0; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = size_t(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Sample k distinct indices from [0, n) in selection order (partial
    // Fisher-Yates over a scratch index vector).
    std::vector<size_t> sample_without_replacement(size_t n, size_t k) {
        std::vector<size_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = i;
        std::vector<size_t> out;
        out.reserve(k);
        for (size_t i = 0; i < k && i < n; ++i) {
            size_t j = i + size_t(below(n - i));
            std::swap(idx[i], idx[j]);
            out.push_back(idx[i]);
        }
        return out;
    }

    std::string state() const {
        std::ostringstream os;
        os << gen_;
        return os.str();
    }

    void set_state(const std::string& s) {
        std::istringstream is(s);
        is >> gen_;
        if (!is) throw DataError("rng state string is malformed");
    }

  private:
    std::mt19937_64 gen_;
};

// ----- little-endian float64 I/O (checkpoint payloads) -----

inline void write_f64_le(std::ostream& os, const double* p, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        uint64_t bits;
        std::memcpy(&bits, &p[i], 8);
        unsigned char b[8];
        for (int k = 0; k < 8; ++k) b[k] = (unsigned char)(bits >> (8 * k));
        os.write(reinterpret_cast<const char*>(b), 8);
    }
}

inline void read_f64_le(std::istream& is, double* p, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        unsigned char b[8];
        is.read(reinterpret_cast<char*>(b), 8);
        if (!is) throw DataError("checkpoint payload truncated");
        uint64_t bits = 0;
        for (int k = 0; k < 8; ++k) bits |= uint64_t(b[k]) << (8 * k);
        std::memcpy(&p[i], &bits, 8);
    }
}

namespace par {

// Worker cap: METAIKG_THREADS env var, else hardware concurrency.
int thread_count();

// Runs fn(i) for i in [0, n). Results must go into per-index slots; the
// caller reduces them afterwards in ascending order.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

}  // namespace par

}  // namespace metaikg
