#pragma once

// Fractional Brownian motion on the dyadic grid {k 2^-n : 0 <= k <= 2^n}.
//
// Increments at step h = 2^-n form fractional Gaussian noise with autocovariance
//   rho(k) = (|k+1|^{2a} - 2|k|^{2a} + |k-1|^{2a}) h^{2a} / 2.
// They are drawn exactly by circulant embedding (Davies-Harte): the first row of the
// 2N x 2N circulant extension is diagonalized by a real FFT, and one Hermitian
// Gaussian vector scaled by the square-root spectrum is transformed back. A dense
// Cholesky factorization is kept as the fallback for small grids.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <istream>
#include <memory>
#include <mutex>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <fftw3.h>

#include "dimlab/error.hpp"
#include "dimlab/rng.hpp"

namespace dimlab {

inline constexpr int kMaxFbmOrder = 22;
inline constexpr int kMaxDenseOrder = 10;

inline void require_hurst(double alpha)
{
    detail::require<InvalidArgument>(alpha > 0.0 && alpha < 1.0, "hurst index must lie in (0,1)");
}

/// E[B(s) B(t)] = (|t|^{2a} + |s|^{2a} - |t-s|^{2a}) / 2.
inline double covariance(double alpha, double s, double t)
{
    require_hurst(alpha);
    const double e = 2.0 * alpha;
    return 0.5 * (std::pow(std::abs(t), e) + std::pow(std::abs(s), e) - std::pow(std::abs(t - s), e));
}

/// Autocovariance of unit-step fractional Gaussian noise at lag k.
inline double fgn_autocovariance(double alpha, std::int64_t k)
{
    const double e = 2.0 * alpha;
    const auto kk = static_cast<double>(k < 0 ? -k : k);
    return 0.5 * (std::pow(kk + 1.0, e) - 2.0 * std::pow(kk, e) + std::pow(std::abs(kk - 1.0), e));
}

/// Sampled path B(k 2^-n), k = 0..2^n.
class FbmPath {
public:
    FbmPath(double hurst, int order, std::uint64_t seed, std::vector<double> values)
        : hurst_(hurst), order_(order), seed_(seed), values_(std::move(values))
    {
        require_hurst(hurst);
        detail::require<InvalidArgument>(order >= 0 && order <= kMaxFbmOrder, "path order outside [0, 22]");
        detail::require<InvalidArgument>(values_.size() == (std::size_t{1} << order) + 1,
                                         "path needs 2^order + 1 values");
        detail::require<InvalidArgument>(values_.front() == 0.0, "path must start at 0");
        for (double v : values_) detail::require<InvalidArgument>(std::isfinite(v), "path values must be finite");
    }

    /// Deterministic path t -> f(t) on the grid, for diagnostics and tests.
    template <class F>
    static FbmPath from_function(double hurst, int order, F&& f)
    {
        std::vector<double> v((std::size_t{1} << order) + 1);
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(std::ldexp(static_cast<double>(k), -order));
        v[0] = 0.0;
        return {hurst, order, 0, std::move(v)};
    }

    [[nodiscard]] double hurst() const { return hurst_; }
    [[nodiscard]] int order() const { return order_; }
    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] std::span<const double> values() const { return values_; }
    [[nodiscard]] std::size_t steps() const { return values_.size() - 1; }
    [[nodiscard]] double at(std::size_t k) const { return values_[k]; }
    [[nodiscard]] double time(std::size_t k) const { return std::ldexp(static_cast<double>(k), -order_); }

    friend bool operator==(const FbmPath&, const FbmPath&) = default;

private:
    double hurst_;
    int order_;
    std::uint64_t seed_;
    std::vector<double> values_;
};

namespace detail {

inline std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n)
{
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (!p) throw ResourceError("fftw_malloc failed");
    return FftwBuffer<T>(p);
}

struct FftwPlan {
    fftw_plan plan = nullptr;
    FftwPlan() = default;
    explicit FftwPlan(fftw_plan p) : plan(p) {}
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;
    FftwPlan(FftwPlan&& o) noexcept : plan(std::exchange(o.plan, nullptr)) {}
    FftwPlan& operator=(FftwPlan&& o) noexcept
    {
        std::swap(plan, o.plan);
        return *this;
    }
    ~FftwPlan()
    {
        if (plan) {
            std::lock_guard lock(fftw_planner_mutex());
            fftw_destroy_plan(plan);
        }
    }
};

} // namespace detail

enum class FbmMethod { automatic, circulant, dense };

/// Reusable sampler for one (alpha, order): the spectrum or Cholesky factor is
/// computed once and every call to sample() draws a fresh path from its seed.
class FbmSampler {
public:
    /// Relative tolerance for negative circulant eigenvalues (clamped to zero).
    static constexpr double kSpectrumTolerance = 1e-10;

    FbmSampler(double alpha, int order, FbmMethod method = FbmMethod::automatic) : alpha_(alpha), order_(order)
    {
        require_hurst(alpha);
        detail::require<ResourceError>(order >= 0 && order <= kMaxFbmOrder, "fbm order outside [0, 22]");
        steps_ = std::size_t{1} << order;
        scale_ = std::exp2(-alpha * order);
        if (method != FbmMethod::dense && setup_circulant()) {
            method_ = FbmMethod::circulant;
            return;
        }
        if (method == FbmMethod::circulant || order > kMaxDenseOrder)
            throw SamplingError("circulant embedding spectrum is negative and order exceeds the dense fallback limit");
        setup_dense();
        method_ = FbmMethod::dense;
    }

    [[nodiscard]] double hurst() const { return alpha_; }
    [[nodiscard]] int order() const { return order_; }
    [[nodiscard]] FbmMethod method() const { return method_; }
    /// Most negative eigenvalue of the embedding relative to the largest.
    [[nodiscard]] double min_relative_eigenvalue() const { return min_relative_eigenvalue_; }

    [[nodiscard]] FbmPath sample(std::uint64_t seed) const
    {
        RandomStream rng(seed);
        std::vector<double> increments = method_ == FbmMethod::circulant ? circulant_draw(rng) : dense_draw(rng);
        std::vector<double> values(steps_ + 1, 0.0);
        double acc = 0.0;
        for (std::size_t k = 0; k < steps_; ++k) {
            acc += increments[k] * scale_;
            values[k + 1] = acc;
        }
        return {alpha_, order_, seed, std::move(values)};
    }

private:
    bool setup_circulant()
    {
        const std::size_t m = 2 * steps_;
        auto row = detail::fftw_buffer<double>(m);
        auto spec = detail::fftw_buffer<fftw_complex>(m / 2 + 1);
        for (std::size_t k = 0; k <= steps_; ++k) row[k] = fgn_autocovariance(alpha_, static_cast<std::int64_t>(k));
        for (std::size_t k = steps_ + 1; k < m; ++k) row[k] = row[m - k];
        {
            detail::FftwPlan plan;
            {
                std::lock_guard lock(detail::fftw_planner_mutex());
                plan = detail::FftwPlan(fftw_plan_dft_r2c_1d(static_cast<int>(m), row.get(), spec.get(), FFTW_ESTIMATE));
            }
            fftw_execute(plan.plan);
        }
        double top = 0.0;
        double low = 0.0;
        sqrt_eigen_.assign(m / 2 + 1, 0.0);
        for (std::size_t k = 0; k <= m / 2; ++k) {
            const double lambda = spec[k][0];
            top = std::max(top, lambda);
            low = std::min(low, lambda);
            sqrt_eigen_[k] = lambda;
        }
        min_relative_eigenvalue_ = top > 0.0 ? low / top : -1.0;
        if (min_relative_eigenvalue_ < -kSpectrumTolerance) return false;
        for (auto& v : sqrt_eigen_) v = std::sqrt(std::max(v, 0.0) / static_cast<double>(m));

        freq_ = detail::fftw_buffer<fftw_complex>(m / 2 + 1);
        out_ = detail::fftw_buffer<double>(m);
        std::lock_guard lock(detail::fftw_planner_mutex());
        inverse_ = detail::FftwPlan(fftw_plan_dft_c2r_1d(static_cast<int>(m), freq_.get(), out_.get(), FFTW_ESTIMATE));
        return true;
    }

    void setup_dense()
    {
        const auto n = static_cast<Eigen::Index>(steps_);
        Eigen::MatrixXd cov(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = fgn_autocovariance(alpha_, i - j);
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) throw SamplingError("fGn covariance is not positive definite");
        factor_ = llt.matrixL();
    }

    std::vector<double> circulant_draw(RandomStream& rng) const
    {
        // Hermitian input w_k, k = 0..M/2, with w_0 and w_{M/2} real; the c2r transform
        // returns a real vector whose first N entries have the fGn covariance.
        const std::size_t m = 2 * steps_;
        const double half = std::sqrt(0.5);
        std::lock_guard lock(exec_mutex_);
        freq_[0][0] = sqrt_eigen_[0] * rng.normal();
        freq_[0][1] = 0.0;
        for (std::size_t k = 1; k < m / 2; ++k) {
            freq_[k][0] = sqrt_eigen_[k] * half * rng.normal();
            freq_[k][1] = sqrt_eigen_[k] * half * rng.normal();
        }
        freq_[m / 2][0] = sqrt_eigen_[m / 2] * rng.normal();
        freq_[m / 2][1] = 0.0;
        fftw_execute_dft_c2r(inverse_.plan, freq_.get(), out_.get());
        return {out_.get(), out_.get() + steps_};
    }

    std::vector<double> dense_draw(RandomStream& rng) const
    {
        Eigen::VectorXd z(static_cast<Eigen::Index>(steps_));
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
        const Eigen::VectorXd x = factor_ * z;
        return {x.data(), x.data() + x.size()};
    }

    double alpha_;
    int order_;
    std::size_t steps_ = 0;
    double scale_ = 1.0;
    FbmMethod method_ = FbmMethod::circulant;
    double min_relative_eigenvalue_ = 0.0;
    std::vector<double> sqrt_eigen_;
    detail::FftwBuffer<fftw_complex> freq_;
    detail::FftwBuffer<double> out_;
    detail::FftwPlan inverse_;
    mutable std::mutex exec_mutex_;
    Eigen::MatrixXd factor_;
};

/// Exact sample of B on the order-n dyadic grid from a seeded counter-based stream.
inline FbmPath sample_path(double alpha, int order, std::uint64_t seed, FbmMethod method = FbmMethod::automatic)
{
    return FbmSampler(alpha, order, method).sample(seed);
}

/// max over h = 2^-j (2 <= j <= order) and grid t <= 1 - h of
/// |B(t+h) - B(t)| / sqrt(2 h^{2a} log(1/h)).
inline double holder_stat(const FbmPath& path)
{
    detail::require<InvalidArgument>(path.order() >= 2, "holder_stat: path order must be >= 2");
    const auto v = path.values();
    double best = 0.0;
    for (int j = 2; j <= path.order(); ++j) {
        const double h = std::ldexp(1.0, -j);
        const double modulus = std::sqrt(2.0 * std::pow(h, 2.0 * path.hurst()) * std::log(1.0 / h));
        const std::size_t stride = std::size_t{1} << (path.order() - j);
        double worst = 0.0;
        for (std::size_t k = 0; k + stride < v.size(); ++k) worst = std::max(worst, std::abs(v[k + stride] - v[k]));
        best = std::max(best, worst / modulus);
    }
    return best;
}

/// Uniform modulus sqrt(2 h^{2a} log(1/h)) at h = 2^-order.
inline double grid_modulus(double alpha, int order)
{
    const double h = std::ldexp(1.0, -order);
    return order == 0 ? 0.0 : std::sqrt(2.0 * std::pow(h, 2.0 * alpha) * std::log(1.0 / h));
}

// CSV: header "k,t,B", one row per grid point.
inline void write_path_csv(std::ostream& os, const FbmPath& path)
{
    os << "k,t,B\n";
    os.precision(17);
    for (std::size_t k = 0; k <= path.steps(); ++k) os << k << ',' << path.time(k) << ',' << path.at(k) << '\n';
}

// Binary: little-endian f64 alpha, u32 order, u64 seed, then 2^order + 1 f64 values.
namespace detail {

template <class T>
void put_le(std::ostream& os, T v)
{
    static_assert(std::endian::native == std::endian::little, "binary path format assumes a little-endian host");
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    os.write(buf, sizeof(T));
}

template <class T>
T get_le(std::istream& is)
{
    char buf[sizeof(T)];
    if (!is.read(buf, sizeof(T))) throw ParseError("truncated binary path");
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

} // namespace detail

inline void write_path_binary(std::ostream& os, const FbmPath& path)
{
    detail::put_le(os, path.hurst());
    detail::put_le(os, static_cast<std::uint32_t>(path.order()));
    detail::put_le(os, path.seed());
    for (double v : path.values()) detail::put_le(os, v);
}

inline FbmPath read_path_binary(std::istream& is)
{
    const auto alpha = detail::get_le<double>(is);
    const auto order = detail::get_le<std::uint32_t>(is);
    const auto seed = detail::get_le<std::uint64_t>(is);
    if (order > static_cast<std::uint32_t>(kMaxFbmOrder)) throw ParseError("binary path order above 22");
    std::vector<double> values((std::size_t{1} << order) + 1);
    for (auto& v : values) v = detail::get_le<double>(is);
    return {alpha, static_cast<int>(order), seed, std::move(values)};
}

} // namespace dimlab
