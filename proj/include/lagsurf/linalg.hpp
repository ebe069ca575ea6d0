#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace lagsurf {

using cplx = std::complex<double>;

template <int N>
struct VecC {
    std::array<cplx, N> v{};

    cplx& operator[](int i) { return v[i]; }
    const cplx& operator[](int i) const { return v[i]; }

    VecC operator+(const VecC& o) const {
        VecC r;
        for (int i = 0; i < N; ++i) r.v[i] = v[i] + o.v[i];
        return r;
    }
    VecC operator-(const VecC& o) const {
        VecC r;
        for (int i = 0; i < N; ++i) r.v[i] = v[i] - o.v[i];
        return r;
    }
    VecC operator*(cplx s) const {
        VecC r;
        for (int i = 0; i < N; ++i) r.v[i] = v[i] * s;
        return r;
    }
    double max_abs() const {
        double m = 0.0;
        for (int i = 0; i < N; ++i) m = std::max(m, std::abs(v[i]));
        return m;
    }
};

template <int N>
struct MatC {
    // Row-major storage; (r, c) entry at m[r * N + c].
    std::array<cplx, N * N> m{};

    cplx& operator()(int r, int c) { return m[r * N + c]; }
    const cplx& operator()(int r, int c) const { return m[r * N + c]; }

    static MatC zero() { return MatC{}; }
    static MatC identity() {
        MatC r;
        for (int i = 0; i < N; ++i) r(i, i) = 1.0;
        return r;
    }

    MatC operator+(const MatC& o) const {
        MatC r;
        for (int i = 0; i < N * N; ++i) r.m[i] = m[i] + o.m[i];
        return r;
    }
    MatC operator-(const MatC& o) const {
        MatC r;
        for (int i = 0; i < N * N; ++i) r.m[i] = m[i] - o.m[i];
        return r;
    }
    MatC operator*(cplx s) const {
        MatC r;
        for (int i = 0; i < N * N; ++i) r.m[i] = m[i] * s;
        return r;
    }
    MatC operator*(const MatC& o) const {
        MatC r;
        for (int i = 0; i < N; ++i)
            for (int k = 0; k < N; ++k) {
                const cplx a = (*this)(i, k);
                for (int j = 0; j < N; ++j) r(i, j) += a * o(k, j);
            }
        return r;
    }
    VecC<N> operator*(const VecC<N>& x) const {
        VecC<N> r;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) r[i] += (*this)(i, j) * x[j];
        return r;
    }

    VecC<N> col(int c) const {
        VecC<N> r;
        for (int i = 0; i < N; ++i) r[i] = (*this)(i, c);
        return r;
    }
    void set_col(int c, const VecC<N>& x) {
        for (int i = 0; i < N; ++i) (*this)(i, c) = x[i];
    }

    MatC adjoint() const {
        MatC r;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) r(i, j) = std::conj((*this)(j, i));
        return r;
    }

    double frobenius() const {
        double s = 0.0;
        for (const cplx& x : m) s += std::norm(x);
        return std::sqrt(s);
    }
};

using Vec3c = VecC<3>;
using Vec4c = VecC<4>;
using Vec5c = VecC<5>;
using Mat3c = MatC<3>;
using Mat4c = MatC<4>;
using Mat5c = MatC<5>;

// Largest singular value by power iteration on A^H A. Accurate to ~1e-12 on
// the well-conditioned small matrices this project produces.
template <int N>
double operator_norm(const MatC<N>& a) {
    const MatC<N> b = a.adjoint() * a;
    VecC<N> x;
    for (int i = 0; i < N; ++i) x[i] = cplx(1.0 + 0.1 * i, 0.05 * i);
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        VecC<N> y = b * x;
        double nrm = 0.0;
        for (int i = 0; i < N; ++i) nrm += std::norm(y[i]);
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) return 0.0;
        for (int i = 0; i < N; ++i) y[i] /= nrm;
        x = y;
        lambda = nrm;
    }
    return std::sqrt(lambda);
}

} // namespace lagsurf
