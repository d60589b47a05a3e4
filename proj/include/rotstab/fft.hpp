#pragma once

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "rotstab/field.hpp"

namespace rotstab {

/// Discrete Fourier transform contract between physical samples on the
/// uniform periodic grid and SpectralField coefficients.
///
/// Plans are FFTW_ESTIMATE | FFTW_UNALIGNED so that planning is deterministic
/// and plans can execute on any buffer of the right shape. One cached plan
/// pair per grid shape; fftw_execute_dft on distinct buffers is thread-safe.
class Fft {
public:
    static Fft& instance() {
        static Fft f;
        return f;
    }

    /// Spectral -> physical (complex samples), no normalization on this side.
    void backward(const GridSpec& g, const Complex* in, Complex* out) {
        fftw_execute_dft(plan(g, FFTW_BACKWARD),
                         reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
    }

    /// Physical (complex samples) -> spectral with the 1/N normalization.
    void forward(const GridSpec& g, const Complex* in, Complex* out) {
        fftw_execute_dft(plan(g, FFTW_FORWARD),
                         reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
        double inv = 1.0 / static_cast<double>(g.num_modes());
        for (std::size_t m = 0; m < g.num_modes(); ++m) out[m] *= inv;
    }

private:
    Fft() = default;
    ~Fft() {
        for (auto& [key, p] : plans_) fftw_destroy_plan(p);
    }
    Fft(const Fft&) = delete;

    fftw_plan plan(const GridSpec& g, int sign) {
        std::scoped_lock lock(mutex_);
        auto key = std::make_tuple(g.nx, g.ny, g.nz, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<Complex> a(g.num_modes()), b(g.num_modes());
        fftw_plan p = fftw_plan_dft_3d(g.nx, g.ny, g.nz,
                                       reinterpret_cast<fftw_complex*>(a.data()),
                                       reinterpret_cast<fftw_complex*>(b.data()), sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, p);
        return p;
    }

    std::mutex mutex_;
    std::map<std::tuple<int, int, int, int>, fftw_plan> plans_;
};

/// Real physical samples -> spectral coefficients.
inline SpectralField forward_transform(const GridSpec& grid,
                                       const std::vector<std::vector<double>>& samples) {
    grid.validate();
    int ncomp = static_cast<int>(samples.size());
    if (ncomp != 1 && ncomp != 3)
        throw ConfigError("forward_transform: expected 1 or 3 components");
    for (const auto& s : samples)
        if (s.size() != grid.num_modes())
            throw ConfigError("forward_transform: sample count does not match grid");
    SpectralField f(grid, ncomp);
    std::vector<Complex> buf(grid.num_modes());
    for (int c = 0; c < ncomp; ++c) {
        for (std::size_t m = 0; m < grid.num_modes(); ++m) buf[m] = samples[c][m];
        Fft::instance().forward(grid, buf.data(), f.component(c));
    }
    return f;
}

/// Spectral coefficients -> complex physical samples of one component.
inline std::vector<Complex> to_physical(const SpectralField& f, int c) {
    std::vector<Complex> out(f.modes_per_component());
    Fft::instance().backward(f.grid(), f.component(c), out.data());
    return out;
}

/// Spectral coefficients -> real physical samples; imag_residue reports the
/// largest imaginary part left behind (zero for Hermitian-symmetric input).
inline std::vector<std::vector<double>> backward_transform(const SpectralField& f,
                                                           double* imag_residue = nullptr) {
    std::vector<std::vector<double>> out(f.n_components());
    double worst = 0.0;
    for (int c = 0; c < f.n_components(); ++c) {
        auto phys = to_physical(f, c);
        out[c].resize(phys.size());
        for (std::size_t m = 0; m < phys.size(); ++m) {
            out[c][m] = phys[m].real();
            worst = std::max(worst, std::abs(phys[m].imag()));
        }
    }
    if (imag_residue) *imag_residue = worst;
    return out;
}

}  // namespace rotstab
