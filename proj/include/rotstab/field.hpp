#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "rotstab/grid.hpp"

namespace rotstab {

using Complex = std::complex<double>;

/// Fourier coefficients of a scalar (n_components = 1) or vector
/// (n_components = 3) field, indexed (component, k, xi, eta) in FFT order.
///
/// Coefficients follow the convention f(x) = sum_k c_k exp(i k.x), so the
/// constant field 1 has c_0 = 1. Real fields satisfy the Hermitian symmetry
/// c(-k) = conj(c(k)).
class SpectralField {
public:
    SpectralField() = default;
    SpectralField(const GridSpec& grid, int n_components)
        : grid_(grid), n_components_(n_components),
          coeffs_(static_cast<std::size_t>(n_components) * grid.num_modes()) {
        if (n_components != 1 && n_components != 3)
            throw ConfigError("SpectralField: n_components must be 1 or 3");
    }

    const GridSpec& grid() const { return grid_; }
    int n_components() const { return n_components_; }
    std::size_t modes_per_component() const { return grid_.num_modes(); }

    std::size_t index(int c, int i, int j, int l) const {
        return ((static_cast<std::size_t>(c) * grid_.nx + i) * grid_.ny + j) * grid_.nz + l;
    }
    Complex& at(int c, int i, int j, int l) { return coeffs_[index(c, i, j, l)]; }
    const Complex& at(int c, int i, int j, int l) const { return coeffs_[index(c, i, j, l)]; }

    Complex* data() { return coeffs_.data(); }
    const Complex* data() const { return coeffs_.data(); }
    Complex* component(int c) { return coeffs_.data() + static_cast<std::size_t>(c) * grid_.num_modes(); }
    const Complex* component(int c) const {
        return coeffs_.data() + static_cast<std::size_t>(c) * grid_.num_modes();
    }
    std::vector<Complex>& raw() { return coeffs_; }
    const std::vector<Complex>& raw() const { return coeffs_; }

    void fill_zero() { std::fill(coeffs_.begin(), coeffs_.end(), Complex(0.0, 0.0)); }

    SpectralField& operator+=(const SpectralField& o) {
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        return *this;
    }
    SpectralField& operator*=(Complex s) {
        for (auto& c : coeffs_) c *= s;
        return *this;
    }
    SpectralField& operator*=(double s) {
        for (auto& c : coeffs_) c *= s;
        return *this;
    }

    /// Visit every mode of one component: f(i, j, l, mode, coeff&).
    template <class F>
    void for_each_mode(int c, F&& f) {
        for (int i = 0; i < grid_.nx; ++i)
            for (int j = 0; j < grid_.ny; ++j)
                for (int l = 0; l < grid_.nz; ++l)
                    f(i, j, l, Mode{grid_.kx(i), grid_.ky(j), grid_.kz(l)}, at(c, i, j, l));
    }
    template <class F>
    void for_each_mode(int c, F&& f) const {
        for (int i = 0; i < grid_.nx; ++i)
            for (int j = 0; j < grid_.ny; ++j)
                for (int l = 0; l < grid_.nz; ++l)
                    f(i, j, l, Mode{grid_.kx(i), grid_.ky(j), grid_.kz(l)}, at(c, i, j, l));
    }

    /// Project coefficients onto the Hermitian-symmetric part, making the
    /// represented field exactly real.
    void enforce_hermitian() {
        const int nx = grid_.nx, ny = grid_.ny, nz = grid_.nz;
        for (int c = 0; c < n_components_; ++c)
            for (int i = 0; i < nx; ++i) {
                int im = GridSpec::mirror(i, nx);
                for (int j = 0; j < ny; ++j) {
                    int jm = GridSpec::mirror(j, ny);
                    for (int l = 0; l < nz; ++l) {
                        int lm = GridSpec::mirror(l, nz);
                        std::size_t a = index(c, i, j, l), b = index(c, im, jm, lm);
                        if (a > b) continue;
                        Complex va = coeffs_[a], vb = coeffs_[b];
                        Complex avg = 0.5 * (va + std::conj(vb));
                        coeffs_[a] = avg;
                        coeffs_[b] = std::conj(avg);
                    }
                }
            }
    }

    /// Largest |c(k) - conj(c(-k))| over all modes.
    double hermitian_defect() const {
        const int nx = grid_.nx, ny = grid_.ny, nz = grid_.nz;
        double worst = 0.0;
        for (int c = 0; c < n_components_; ++c)
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j)
                    for (int l = 0; l < nz; ++l) {
                        Complex v = at(c, i, j, l);
                        Complex w = at(c, GridSpec::mirror(i, nx), GridSpec::mirror(j, ny),
                                       GridSpec::mirror(l, nz));
                        worst = std::max(worst, std::abs(v - std::conj(w)));
                    }
        return worst;
    }

    /// Sum of |c|^2 over all modes and components.
    double coeff_l2_sq() const {
        double s = 0.0;
        for (const auto& c : coeffs_) s += std::norm(c);
        return s;
    }

    /// L^2(box) norm squared, integral of |f|^2 over the box (Parseval).
    double l2_sq() const { return grid_.volume() * coeff_l2_sq(); }

    /// Largest coefficient modulus on modes with k != 0.
    double max_nonzero_k_modulus() const {
        double worst = 0.0;
        for (int c = 0; c < n_components_; ++c)
            for (int i = 1; i < grid_.nx; ++i)
                for (int j = 0; j < grid_.ny; ++j)
                    for (int l = 0; l < grid_.nz; ++l)
                        worst = std::max(worst, std::abs(at(c, i, j, l)));
        return worst;
    }

private:
    GridSpec grid_;
    int n_components_ = 1;
    std::vector<Complex> coeffs_;
};

}  // namespace rotstab
