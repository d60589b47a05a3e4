#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>

#include "rotstab/field.hpp"

namespace rotstab {

/// Checkpoint format: fixed little-endian header (magic, schema version,
/// grid, physical parameters, time bookkeeping) followed by the raw
/// complex64 (float32 re/im pairs) coefficient block in (c, k, xi, eta)
/// storage order. Byte-for-byte deterministic for a given state.
namespace checkpoint {

inline constexpr char magic[8] = {'R', 'S', 'C', 'K', 'P', 'T', '0', '1'};
inline constexpr std::uint32_t schema_version = 1;

struct Header {
    std::uint32_t version = schema_version;
    std::uint32_t domain_kind = 0;
    std::uint32_t nx = 0, ny = 0, nz = 0;
    std::uint32_t n_components = 0;
    double Lx = 0, Ly = 0, Lz = 0;
    double dealias_fraction = 0;
    double nu = 0, beta = 0;
    double t = 0, frame_time = 0;
    double discarded_energy = 0;
};

}  // namespace checkpoint

inline void write_checkpoint(const std::string& path, const SpectralField& f, double t,
                             double frame_time, double nu, double beta,
                             double discarded_energy = 0.0) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("write_checkpoint: cannot open " + path);
    const GridSpec& g = f.grid();
    checkpoint::Header h;
    h.domain_kind = static_cast<std::uint32_t>(g.domain_kind);
    h.nx = g.nx;
    h.ny = g.ny;
    h.nz = g.nz;
    h.n_components = f.n_components();
    h.Lx = g.Lx;
    h.Ly = g.Ly;
    h.Lz = g.Lz;
    h.dealias_fraction = g.dealias_fraction;
    h.nu = nu;
    h.beta = beta;
    h.t = t;
    h.frame_time = frame_time;
    h.discarded_energy = discarded_energy;
    out.write(checkpoint::magic, 8);
    out.write(reinterpret_cast<const char*>(&h), sizeof(h));
    std::vector<float> block(2 * f.raw().size());
    for (std::size_t i = 0; i < f.raw().size(); ++i) {
        block[2 * i] = static_cast<float>(f.raw()[i].real());
        block[2 * i + 1] = static_cast<float>(f.raw()[i].imag());
    }
    out.write(reinterpret_cast<const char*>(block.data()),
              static_cast<std::streamsize>(block.size() * sizeof(float)));
    if (!out) throw ConfigError("write_checkpoint: write failed for " + path);
}

inline SpectralField read_checkpoint_field(const std::string& path, GridSpec* grid_out,
                                           double* t_out = nullptr, double* nu_out = nullptr,
                                           double* beta_out = nullptr,
                                           double* frame_time_out = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("read_checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, checkpoint::magic, 8) != 0)
        throw ConfigError("read_checkpoint: bad magic in " + path);
    checkpoint::Header h;
    in.read(reinterpret_cast<char*>(&h), sizeof(h));
    if (h.version != checkpoint::schema_version)
        throw ConfigError("read_checkpoint: unsupported schema version");
    GridSpec g;
    g.domain_kind = static_cast<DomainKind>(h.domain_kind);
    g.nx = h.nx;
    g.ny = h.ny;
    g.nz = h.nz;
    g.Lx = h.Lx;
    g.Ly = h.Ly;
    g.Lz = h.Lz;
    g.dealias_fraction = h.dealias_fraction;
    SpectralField f(g, static_cast<int>(h.n_components));
    std::vector<float> block(2 * f.raw().size());
    in.read(reinterpret_cast<char*>(block.data()),
            static_cast<std::streamsize>(block.size() * sizeof(float)));
    if (!in) throw ConfigError("read_checkpoint: truncated file " + path);
    for (std::size_t i = 0; i < f.raw().size(); ++i)
        f.raw()[i] = Complex(block[2 * i], block[2 * i + 1]);
    if (grid_out) *grid_out = g;
    if (t_out) *t_out = h.t;
    if (nu_out) *nu_out = h.nu;
    if (beta_out) *beta_out = h.beta;
    if (frame_time_out) *frame_time_out = h.frame_time;
    return f;
}

}  // namespace rotstab
