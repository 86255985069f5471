#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "diffwave/error.hpp"
#include "diffwave/wavelets.hpp"

namespace diffwave {

// Binary layout (all little-endian):
//   "DWDICT01"
//   u64 n_vertices, u64 n_columns, u64 n_scales, u64 n_samples
//   f64 t_max, f64 rho, f64 t_step
//   u64 sample index * n_samples
//   f64 value * (n_vertices * n_columns), column-major

inline constexpr std::array<char, 8> kDictionaryMagic = {'D', 'W', 'D', 'I', 'C', 'T', '0', '1'};

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<unsigned char, 8> b{};
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b.data()), 8);
}

inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline std::uint64_t get_u64(std::istream& in) {
    std::array<unsigned char, 8> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 8)) throw DataError("truncated dictionary file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace detail

inline void write_dictionary(std::ostream& out, const DictionaryData& dict) {
    out.write(kDictionaryMagic.data(), kDictionaryMagic.size());
    detail::put_u64(out, static_cast<std::uint64_t>(dict.n_vertices()));
    detail::put_u64(out, static_cast<std::uint64_t>(dict.n_columns()));
    detail::put_u64(out, static_cast<std::uint64_t>(dict.n_scales));
    detail::put_u64(out, static_cast<std::uint64_t>(dict.n_samples()));
    detail::put_f64(out, dict.t_max);
    detail::put_f64(out, dict.rho);
    detail::put_f64(out, dict.t_step);
    for (Index s : dict.samples.indices) detail::put_u64(out, static_cast<std::uint64_t>(s));
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(dict.columns.data()),
                  static_cast<std::streamsize>(dict.columns.size() * sizeof(double)));
    } else {
        for (Index i = 0; i < dict.columns.size(); ++i) detail::put_f64(out, dict.columns.data()[i]);
    }
}

inline DictionaryData read_dictionary(std::istream& in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kDictionaryMagic)
        throw DataError("not a dictionary file (bad magic)");
    DictionaryData dict;
    const auto n_vertices = detail::get_u64(in);
    const auto n_columns = detail::get_u64(in);
    dict.n_scales = static_cast<Index>(detail::get_u64(in));
    const auto n_samples = detail::get_u64(in);
    dict.t_max = detail::get_f64(in);
    dict.rho = detail::get_f64(in);
    dict.t_step = detail::get_f64(in);
    if (n_samples * static_cast<std::uint64_t>(dict.n_scales) != n_columns)
        throw DataError("dictionary header is inconsistent: columns != samples * scales");
    // Guard against absurd headers before allocating (2^33 doubles = 64 GiB).
    constexpr std::uint64_t kMaxEntries = std::uint64_t{1} << 33;
    if (n_vertices == 0 || n_columns == 0 || n_vertices > kMaxEntries / n_columns)
        throw DataError("dictionary header has implausible size " + std::to_string(n_vertices) + " x " +
                        std::to_string(n_columns));
    dict.samples.indices.resize(n_samples);
    for (auto& s : dict.samples.indices) s = static_cast<Index>(detail::get_u64(in));
    dict.columns.resize(static_cast<Index>(n_vertices), static_cast<Index>(n_columns));
    if constexpr (std::endian::native == std::endian::little) {
        const auto bytes = static_cast<std::streamsize>(dict.columns.size() * sizeof(double));
        if (!in.read(reinterpret_cast<char*>(dict.columns.data()), bytes)) throw DataError("truncated dictionary file");
    } else {
        for (Index i = 0; i < dict.columns.size(); ++i) dict.columns.data()[i] = detail::get_f64(in);
    }
    return dict;
}

/// Human-readable metadata, one key=value per line.
inline std::string dictionary_metadata(const DictionaryData& dict, std::string_view kind) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "format=DWDICT01\n"
        << "kind=" << kind << '\n'
        << "n_vertices=" << dict.n_vertices() << '\n'
        << "n_columns=" << dict.n_columns() << '\n'
        << "n_scales=" << dict.n_scales << '\n'
        << "n_samples=" << dict.n_samples() << '\n'
        << "t_max=" << dict.t_max << '\n'
        << "rho=" << dict.rho << '\n'
        << "t_step=" << dict.t_step << '\n'
        << "sampling=" << to_string(dict.samples.strategy) << '\n'
        << "seed=" << dict.samples.seed << '\n'
        << "samples=";
    for (std::size_t i = 0; i < dict.samples.indices.size(); ++i) out << (i ? "," : "") << dict.samples.indices[i];
    out << '\n';
    return out.str();
}

/// Writes `path` plus a sidecar with the same stem and a ".meta" suffix.
inline void save_dictionary(const std::filesystem::path& path, const DictionaryData& dict,
                            std::string_view kind = "wavelet") {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write dictionary file " + path.string());
        write_dictionary(out, dict);
    }
    std::filesystem::path meta = path;
    meta.replace_extension(".meta");
    std::ofstream out(meta);
    if (!out) throw DataError("cannot write metadata file " + meta.string());
    out << dictionary_metadata(dict, kind);
}

inline DictionaryData load_dictionary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dictionary file " + path.string());
    return read_dictionary(in);
}

}  // namespace diffwave
