#pragma once

#include <memory>

#include "vsmooth/core.hpp"
#include "vsmooth/projections.hpp"

namespace vsmooth {

class ZeroSmooth final : public SmoothFunction {
public:
    explicit ZeroSmooth(Index n) : n_(n) {}
    double eval(const Vector&) const override { return 0.0; }
    Vector grad(const Vector& x) const override { return Vector::Zero(x.size()); }
    double lip_grad() const override { return 0.0; }
    std::optional<Index> dim() const override { return n_; }

private:
    Index n_;
};

/// <c, x> + offset
class LinearSmooth final : public SmoothFunction {
public:
    LinearSmooth(Vector c, double offset = 0.0) : c_(std::move(c)), offset_(offset) {}
    double eval(const Vector& x) const override { return c_.dot(x) + offset_; }
    Vector grad(const Vector&) const override { return c_; }
    double lip_grad() const override { return 0.0; }
    std::optional<Index> dim() const override { return c_.size(); }

private:
    Vector c_;
    double offset_;
};

/// (weight/2) ||x - anchor||^2
class SquaredDistanceToPoint final : public SmoothFunction {
public:
    SquaredDistanceToPoint(Vector anchor, double weight = 1.0) : a_(std::move(anchor)), w_(weight) {}
    double eval(const Vector& x) const override { return 0.5 * w_ * (x - a_).squaredNorm(); }
    Vector grad(const Vector& x) const override { return w_ * (x - a_); }
    double lip_grad() const override { return w_; }
    std::optional<Index> dim() const override { return a_.size(); }

private:
    Vector a_;
    double w_;
};

/// ||B x - b||^2, gradient 2 B^T (B x - b), Lipschitz constant 2 ||B||^2.
class LeastSquares final : public SmoothFunction {
public:
    LeastSquares(Matrix design, Vector target)
        : b_(std::move(design)), t_(std::move(target)), lip_(2.0 * std::pow(operator_norm_bound(b_), 2)) {
        require_dim(t_.size(), b_.rows(), "least-squares target");
    }
    double eval(const Vector& x) const override { return (b_ * x - t_).squaredNorm(); }
    Vector grad(const Vector& x) const override { return 2.0 * b_.transpose() * (b_ * x - t_); }
    double lip_grad() const override { return lip_; }
    std::optional<Index> dim() const override { return b_.cols(); }
    const Matrix& design() const { return b_; }
    const Vector& target() const { return t_; }

private:
    Matrix b_;
    Vector t_;
    double lip_;
};

/// (lambda/2) d(x, B)^2 with gradient lambda (x - P_B x).
class BallPenalty final : public SmoothFunction {
public:
    BallPenalty(BallSpec ball, double lambda) : ball_(std::move(ball)), lambda_(lambda) {}
    double eval(const Vector& x) const override {
        return 0.5 * lambda_ * (x - project_ball(ball_, x)).squaredNorm();
    }
    Vector grad(const Vector& x) const override { return lambda_ * (x - project_ball(ball_, x)); }
    double lip_grad() const override { return lambda_; }
    std::optional<Index> dim() const override { return ball_.center.size(); }
    const BallSpec& ball() const { return ball_; }
    double lambda() const { return lambda_; }

private:
    BallSpec ball_;
    double lambda_;
};

/// H(x_1, ..., x_N) = (lambda/2) d(x_1, B)^2; only the first block enters.
class FirstBlockBallPenalty final : public SmoothFunction {
public:
    FirstBlockBallPenalty(BallSpec ball, double lambda, Index blocks)
        : inner_(std::move(ball), lambda), blocks_(blocks) {}
    double eval(const Vector& x) const override { return inner_.eval(first(x)); }
    Vector grad(const Vector& x) const override {
        Vector g = Vector::Zero(x.size());
        g.head(block_dim()) = inner_.grad(first(x));
        return g;
    }
    double lip_grad() const override { return inner_.lip_grad(); }
    std::optional<Index> dim() const override { return block_dim() * blocks_; }

private:
    Index block_dim() const { return inner_.ball().center.size(); }
    Vector first(const Vector& x) const {
        require_dim(x.size(), block_dim() * blocks_, "block penalty input");
        return x.head(block_dim());
    }
    BallPenalty inner_;
    Index blocks_;
};

/// (lambda/2) d(x, B x ... x B)^2 over N equal blocks.
class ProductBallPenalty final : public SmoothFunction {
public:
    ProductBallPenalty(BallSpec ball, double lambda, Index blocks)
        : inner_(std::move(ball), lambda), blocks_(blocks) {}
    double eval(const Vector& x) const override {
        const Index n = block_dim();
        require_dim(x.size(), n * blocks_, "product penalty input");
        double s = 0.0;
        for (Index i = 0; i < blocks_; ++i) s += inner_.eval(x.segment(i * n, n));
        return s;
    }
    Vector grad(const Vector& x) const override {
        const Index n = block_dim();
        require_dim(x.size(), n * blocks_, "product penalty input");
        Vector g(x.size());
        for (Index i = 0; i < blocks_; ++i) g.segment(i * n, n) = inner_.grad(x.segment(i * n, n));
        return g;
    }
    double lip_grad() const override { return inner_.lip_grad(); }
    std::optional<Index> dim() const override { return block_dim() * blocks_; }

private:
    Index block_dim() const { return inner_.ball().center.size(); }
    BallPenalty inner_;
    Index blocks_;
};

class SumSmooth final : public SmoothFunction {
public:
    SumSmooth(std::shared_ptr<const SmoothFunction> a, std::shared_ptr<const SmoothFunction> b)
        : a_(std::move(a)), b_(std::move(b)) {}
    double eval(const Vector& x) const override { return a_->eval(x) + b_->eval(x); }
    Vector grad(const Vector& x) const override { return a_->grad(x) + b_->grad(x); }
    double lip_grad() const override { return a_->lip_grad() + b_->lip_grad(); }
    std::optional<Index> dim() const override { return a_->dim() ? a_->dim() : b_->dim(); }

private:
    std::shared_ptr<const SmoothFunction> a_;
    std::shared_ptr<const SmoothFunction> b_;
};

/// x -> h(x + shift)
class ShiftedSmooth final : public SmoothFunction {
public:
    ShiftedSmooth(std::shared_ptr<const SmoothFunction> h, Vector shift) : h_(std::move(h)), z_(std::move(shift)) {}
    double eval(const Vector& x) const override { return h_->eval(x + z_); }
    Vector grad(const Vector& x) const override { return h_->grad(x + z_); }
    double lip_grad() const override { return h_->lip_grad(); }
    std::optional<Index> dim() const override { return z_.size(); }

private:
    std::shared_ptr<const SmoothFunction> h_;
    Vector z_;
};

}  // namespace vsmooth
