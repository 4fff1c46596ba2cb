#pragma once
/// @file common.hpp
/// @brief Error types, string helpers, deterministic sampling primitives and
///        atomic file I/O shared by the rest of the library.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace advisor {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad input: config, dataset records, template bindings, preconditions.
struct ValidationError : Error {
    using Error::Error;
};

/// Filesystem trouble: unreadable paths, failed writes/renames.
struct IoError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// string helpers
// ---------------------------------------------------------------------------

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

/// Splits on '\n'; a trailing '\r' on each piece is stripped.
inline std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view piece = (nl == std::string_view::npos)
                                     ? text.substr(pos)
                                     : text.substr(pos, nl - pos);
        if (!piece.empty() && piece.back() == '\r') piece.remove_suffix(1);
        out.emplace_back(piece);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// deterministic randomness
//
// All sampling in the pipeline goes through the two functions below so that
// runs are reproducible bit-for-bit across platforms.  std::mt19937_64 has a
// standard-specified output sequence and stream format; the bounded draw is
// pinned here because the standard library distributions are not portable.
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

/// Unbiased draw from [0, n).  Rejection sampling on the raw 64-bit engine
/// output: accept v >= 2^64 mod n, return v mod n.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    if (n == 0) throw ValidationError("uniform_below: bound must be positive");
    const std::uint64_t min = (0 - n) % n;  // 2^64 mod n
    std::uint64_t v = rng();
    while (v < min) v = rng();
    return v % n;
}

/// Partial Fisher-Yates from the front: shuffle slots 0..k-1 of the index
/// vector [0..n), each slot i swapped with a uniform j in [i, n).  The first
/// k slots are the sample (distinct, order random).
inline std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n, std::size_t k) {
    if (k > n) {
        throw ValidationError("sample_indices: requested " + std::to_string(k) +
                              " from population of " + std::to_string(n));
    }
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

inline std::string save_rng(const Rng& rng) {
    std::ostringstream oss;
    oss << rng;
    return oss.str();
}

inline Rng restore_rng(const std::string& state) {
    Rng rng;
    std::istringstream iss(state);
    iss >> rng;
    if (iss.fail()) throw ValidationError("restore_rng: malformed generator state");
    return rng;
}

/// FNV-1a 64-bit over the seed bytes then the data bytes.  Used only by the
/// deterministic mock backend; never for persisted identifiers.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](unsigned char byte) {
        h ^= byte;
        h *= 1099511628211ull;
    };
    for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(seed >> (8 * i)));
    for (char c : data) mix(static_cast<unsigned char>(c));
    return h;
}

// ---------------------------------------------------------------------------
// file I/O
// ---------------------------------------------------------------------------

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    std::ostringstream oss;
    oss << in.rdbuf();
    if (in.bad()) throw IoError("read failure on " + path.string());
    return oss.str();
}

/// Writes via temp-file-then-rename in the target directory, so a crash never
/// leaves a half-written file and re-runs never corrupt existing outputs.
inline void write_text_file_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("write failure on " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

}  // namespace advisor
