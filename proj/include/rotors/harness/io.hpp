#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rotors/lattice.hpp"
#include "rotors/observables.hpp"
#include "rotors/trajectory.hpp"

namespace rotors::harness {

namespace fs = std::filesystem;

/// Shortest text that reads back to the same double.
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const fs::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---------------------------------------------------------------------------
// CSV

inline const char* series_header = "t,re_m,im_m,abs_m,phase_unwrapped,energy_per_site";

inline std::string series_csv(const Trajectory& traj, double time_unit = 1.0) {
    const auto phase = unwrap_phase(traj.samples);
    std::string out = std::string(series_header) + "\n";
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const auto& s = traj.samples[i];
        out += fmt(s.t / time_unit) + "," + fmt(s.m.real()) + "," + fmt(s.m.imag()) + "," +
               fmt(std::abs(s.m)) + "," + fmt(phase.phase[i]) + "," + fmt(s.energy_per_site) + "\n";
    }
    return out;
}

inline std::string correlation_csv(std::span<const CorrelationPoint> curve) {
    std::string out = "r,corr,trunc_corr\n";
    for (const auto& p : curve) out += std::to_string(p.r) + "," + fmt(p.corr) + "," + fmt(p.truncated) + "\n";
    return out;
}

inline std::string layers_csv(std::span<const complex> planes) {
    std::string out = "x1,re_m,im_m,abs_m\n";
    for (std::size_t i = 0; i < planes.size(); ++i) {
        out += std::to_string(i) + "," + fmt(planes[i].real()) + "," + fmt(planes[i].imag()) + "," +
               fmt(std::abs(planes[i])) + "\n";
    }
    return out;
}

/// Minimal reader for the CSV files above: header names plus numeric rows.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) return i;
        }
        throw std::invalid_argument("no column '" + std::string(name) + "'");
    }
};

inline CsvTable parse_numeric_csv(std::string_view text) {
    CsvTable t;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty csv");
    std::istringstream head(line);
    for (std::string cell; std::getline(head, cell, ',');) t.columns.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream cells(line);
        for (std::string cell; std::getline(cells, cell, ',');) row.push_back(std::stod(cell));
        if (row.size() != t.columns.size()) throw std::invalid_argument("ragged csv row: " + line);
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Binary snapshots
//
// Little-endian layout:
//   char[8]  magic "ROTSNAP\0"
//   u32      version (1)
//   u32      kind (0 clock, 1 xy)
//   i32[3]   dims
//   i32      N (0 for xy)
//   u64      count (snapshots)
//   u64      sites
//   then per snapshot: f64 t, then sites values
//     (i32 clock indices, or f64 angles for xy)

inline constexpr std::array<char, 8> snapshot_magic{'R', 'O', 'T', 'S', 'N', 'A', 'P', '\0'};
inline constexpr std::uint32_t snapshot_version = 1;

struct SnapshotSet {
    SpinKind kind = SpinKind::xy;
    Dims dims{1, 1, 1};
    int n = 0;
    std::vector<double> times;
    std::vector<double> angles;         // xy: count x sites
    std::vector<std::int32_t> indices;  // clock: count x sites
    std::size_t sites = 0;
};

namespace detail {

template <class T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <class T>
T get(std::string_view in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw std::runtime_error("snapshot file truncated");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace detail

inline std::string encode_snapshots(const Trajectory& traj, const Lattice& lattice, double time_unit = 1.0) {
    if (!traj.has_states) throw std::invalid_argument("trajectory has no recorded states");
    std::string out(snapshot_magic.data(), snapshot_magic.size());
    detail::put<std::uint32_t>(out, snapshot_version);
    detail::put<std::uint32_t>(out, traj.kind == SpinKind::clock ? 0u : 1u);
    for (int d : lattice.dims()) detail::put<std::int32_t>(out, d);
    detail::put<std::int32_t>(out, traj.kind == SpinKind::clock ? traj.clock_size : 0);
    detail::put<std::uint64_t>(out, traj.samples.size());
    detail::put<std::uint64_t>(out, traj.sites);
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        detail::put<double>(out, traj.samples[i].t / time_unit);
        if (traj.kind == SpinKind::clock) {
            for (std::int32_t k : traj.state_indices(i)) detail::put<std::int32_t>(out, k);
        } else {
            for (double a : traj.state_angles(i)) detail::put<double>(out, a);
        }
    }
    return out;
}

inline SnapshotSet decode_snapshots(std::string_view in) {
    std::size_t pos = 0;
    if (in.size() < snapshot_magic.size() ||
        std::memcmp(in.data(), snapshot_magic.data(), snapshot_magic.size()) != 0) {
        throw std::runtime_error("not a snapshot file");
    }
    pos = snapshot_magic.size();
    if (detail::get<std::uint32_t>(in, pos) != snapshot_version) throw std::runtime_error("unknown snapshot version");
    SnapshotSet s;
    s.kind = detail::get<std::uint32_t>(in, pos) == 0 ? SpinKind::clock : SpinKind::xy;
    for (int& d : s.dims) d = detail::get<std::int32_t>(in, pos);
    s.n = detail::get<std::int32_t>(in, pos);
    const auto count = detail::get<std::uint64_t>(in, pos);
    s.sites = detail::get<std::uint64_t>(in, pos);
    for (std::uint64_t i = 0; i < count; ++i) {
        s.times.push_back(detail::get<double>(in, pos));
        for (std::size_t x = 0; x < s.sites; ++x) {
            if (s.kind == SpinKind::clock) {
                s.indices.push_back(detail::get<std::int32_t>(in, pos));
            } else {
                s.angles.push_back(detail::get<double>(in, pos));
            }
        }
    }
    if (pos != in.size()) throw std::runtime_error("trailing bytes in snapshot file");
    return s;
}

// ---------------------------------------------------------------------------
// Manifest

struct ArtifactWriter {
    fs::path directory;
    nlohmann::ordered_json files = nlohmann::ordered_json::array();

    void write(const std::string& name, std::string_view bytes) {
        write_file(directory / name, bytes);
        files.push_back({{"name", name}, {"bytes", bytes.size()}, {"fnv1a64", hex64(fnv1a(bytes))}});
    }
};

/// Checks every file listed in a manifest against its recorded checksum.
inline void verify_manifest(const fs::path& directory) {
    const auto manifest = nlohmann::json::parse(read_file(directory / "manifest.json"));
    for (const auto& f : manifest.at("files")) {
        const std::string bytes = read_file(directory / f.at("name").get<std::string>());
        if (hex64(fnv1a(bytes)) != f.at("fnv1a64").get<std::string>()) {
            throw std::runtime_error("checksum mismatch for " + f.at("name").get<std::string>());
        }
    }
}

}  // namespace rotors::harness
