#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <numeric>
#include <vector>

#include "vsmooth/core.hpp"

namespace vsmooth {

using ProjectionFn = std::function<Vector(const Vector&)>;

struct BallSpec {
    Vector center;
    double radius;

    BallSpec(Vector c, double r) : center(std::move(c)), radius(r) {
        if (!(radius > 0.0)) throw ParameterDomainError("ball radius must be positive");
    }
    static BallSpec origin(Index n, double r) { return BallSpec(Vector::Zero(n), r); }
};

inline Vector project_ball(const BallSpec& ball, const Vector& x) {
    require_dim(x.size(), ball.center.size(), "ball projection input");
    const Vector d = x - ball.center;
    const double dn = d.norm();
    if (dn <= ball.radius) return x;
    return ball.center + (ball.radius / dn) * d;
}

/// Euclidean projection onto the probability simplex by sort-and-threshold.
inline Vector project_simplex(const Vector& x) {
    const Index n = x.size();
    if (n < 1) throw PreconditionError("simplex projection needs N >= 1");
    std::vector<double> u(x.data(), x.data() + n);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0;
    double tau = 0.0;
    for (Index j = 0; j < n; ++j) {
        cumsum += u[j];
        const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) tau = t;
    }
    return (x.array() - tau).max(0.0).matrix();
}

/**
 * Projector onto ker R, cached as P = I - R^+ R. The pseudoinverse comes
 * from an SVD with singular values below 1e-12 * sigma_max treated as zero,
 * so R^+ R is the projector onto the row space spanned by the retained
 * right singular vectors.
 */
class KernelProjector final : public SubspaceProjector {
public:
    explicit KernelProjector(const Matrix& r) : r_(r) {
        if (r.size() == 0 || r.cwiseAbs().maxCoeff() == 0.0) {
            throw DegenerateInputError("kernel projector of a zero matrix; use IdentityProjector for V = H");
        }
        Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeFullV);
        const auto& s = svd.singularValues();
        const double cutoff = 1e-12 * s[0];
        Index rank = 0;
        while (rank < s.size() && s[rank] > cutoff) ++rank;
        const Matrix vr = svd.matrixV().leftCols(rank);
        p_ = Matrix::Identity(r.cols(), r.cols()) - vr * vr.transpose();
        // Symmetrize away rounding so self-adjointness holds to machine precision.
        p_ = 0.5 * (p_ + p_.transpose()).eval();
    }

    Vector apply(const Vector& x) const override {
        require_dim(x.size(), p_.cols(), "kernel projector input");
        return p_ * x;
    }
    Index dim() const override { return p_.cols(); }
    const Matrix& matrix() const { return p_; }
    const Matrix& constraint() const { return r_; }

private:
    Matrix r_;
    Matrix p_;
};

inline KernelProjector build_kernel_projector(const Matrix& r) { return KernelProjector(r); }

/// Projector onto span of the columns of `basis`.
class SpanProjector final : public SubspaceProjector {
public:
    explicit SpanProjector(const Matrix& basis) {
        Eigen::ColPivHouseholderQR<Matrix> qr(basis);
        const Index rank = qr.rank();
        const Matrix q = qr.householderQ() * Matrix::Identity(basis.rows(), rank);
        p_ = q * q.transpose();
    }
    Vector apply(const Vector& x) const override {
        require_dim(x.size(), p_.cols(), "span projector input");
        return p_ * x;
    }
    Index dim() const override { return p_.cols(); }

private:
    Matrix p_;
};

/// Replace every length-(size/blocks) block by the block mean.
inline Vector project_diagonal(const Vector& x, Index blocks) {
    if (blocks < 1 || x.size() % blocks != 0) {
        throw ContractError("diagonal projection: dimension not divisible by block count");
    }
    const Index n = x.size() / blocks;
    Vector mean = Vector::Zero(n);
    for (Index i = 0; i < blocks; ++i) mean += x.segment(i * n, n);
    mean /= static_cast<double>(blocks);
    return mean.replicate(blocks, 1);
}

class DiagonalProjector final : public SubspaceProjector {
public:
    DiagonalProjector(Index block_dim, Index blocks) : n_(block_dim), blocks_(blocks) {}
    Vector apply(const Vector& x) const override {
        require_dim(x.size(), n_ * blocks_, "diagonal projector input");
        return project_diagonal(x, blocks_);
    }
    Index dim() const override { return n_ * blocks_; }

private:
    Index n_;
    Index blocks_;
};

/// Blockwise application of per-block projections; blocks are equal-sized.
inline Vector project_product(const std::vector<ProjectionFn>& projectors, const Vector& x) {
    const Index blocks = static_cast<Index>(projectors.size());
    if (blocks < 1 || x.size() % blocks != 0) throw ContractError("product projection: block count mismatch");
    const Index n = x.size() / blocks;
    Vector out(x.size());
    for (Index i = 0; i < blocks; ++i) out.segment(i * n, n) = projectors[i](x.segment(i * n, n));
    return out;
}

/// V^N for a subspace V of R^n.
class ProductProjector final : public SubspaceProjector {
public:
    ProductProjector(std::shared_ptr<const SubspaceProjector> block, Index blocks)
        : block_(std::move(block)), blocks_(blocks) {}
    Vector apply(const Vector& x) const override {
        require_dim(x.size(), dim(), "product projector input");
        const Index n = block_->dim();
        Vector out(x.size());
        for (Index i = 0; i < blocks_; ++i) out.segment(i * n, n) = block_->apply(x.segment(i * n, n));
        return out;
    }
    Index dim() const override { return block_->dim() * blocks_; }

private:
    std::shared_ptr<const SubspaceProjector> block_;
    Index blocks_;
};

/**
 * V^N intersected with the diagonal set, in closed form: average the blocks,
 * project the mean onto V, replicate. Exact because P_V is linear and
 * commutes with block averaging.
 */
class ReplicatedSubspaceProjector final : public SubspaceProjector {
public:
    ReplicatedSubspaceProjector(std::shared_ptr<const SubspaceProjector> block, Index blocks)
        : block_(std::move(block)), blocks_(blocks) {}
    Vector apply(const Vector& x) const override {
        require_dim(x.size(), dim(), "replicated projector input");
        const Index n = block_->dim();
        Vector mean = Vector::Zero(n);
        for (Index i = 0; i < blocks_; ++i) mean += x.segment(i * n, n);
        mean /= static_cast<double>(blocks_);
        return block_->apply(mean).replicate(blocks_, 1);
    }
    Index dim() const override { return block_->dim() * blocks_; }
    Index blocks() const { return blocks_; }

private:
    std::shared_ptr<const SubspaceProjector> block_;
    Index blocks_;
};

struct DykstraOptions {
    double tol = 1e-12;
    int max_iter = 10000;
};

/// Dykstra's alternating projections onto the intersection of two closed convex sets.
inline Vector dykstra_project(const ProjectionFn& proj_a, const ProjectionFn& proj_b, const Vector& x,
                              DykstraOptions opts = {}) {
    Vector current = x;
    Vector p = Vector::Zero(x.size());
    Vector q = Vector::Zero(x.size());
    double residual = kInfinity;
    for (int it = 0; it < opts.max_iter; ++it) {
        const Vector y = proj_a(current + p);
        p = current + p - y;
        const Vector next = proj_b(y + q);
        q = y + q - next;
        residual = (next - current).norm();
        current = next;
        if (residual <= opts.tol) return current;
    }
    throw NonconvergenceError("Dykstra projection did not converge", residual);
}

}  // namespace vsmooth
