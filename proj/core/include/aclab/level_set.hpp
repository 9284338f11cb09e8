#pragma once

#include <memory>
#include <string>

#include "aclab/expression.hpp"
#include "aclab/types.hpp"

namespace aclab {

// Implicit description of a domain: phi < 0 inside. phi need not be a
// distance function; only its zero set matters.
class Shape {
public:
    virtual ~Shape() = default;
    virtual double phi(Vec2 x) const = 0;
    virtual Box bbox() const = 0;
    virtual std::string describe() const = 0;

    virtual Vec2 gradient(Vec2 x) const;
    // phi_xx, phi_xy, phi_yy
    virtual void hessian(Vec2 x, double& hxx, double& hxy, double& hyy) const;
    // Curvature of the level line through x, positive where the domain is convex.
    double curvature(Vec2 x) const;
    Vec2 unit_normal(Vec2 x) const { return normalized(gradient(x)); }

    // Exact nearest point on {phi = 0} if known in closed form.
    virtual bool closest_point_exact(Vec2 x, Vec2& out) const;
    // Newton projection of x onto {phi = 0}; guess must be close.
    Vec2 project(Vec2 x, Vec2 guess) const;
    // Pull a point near {phi = 0} onto it along the gradient.
    Vec2 pull_to_zero(Vec2 p) const;

protected:
    double scale() const;
};

class DiskShape final : public Shape {
public:
    explicit DiskShape(double r) : r_(r) {}
    double phi(Vec2 x) const override { return norm(x) - r_; }
    Vec2 gradient(Vec2 x) const override;
    Box bbox() const override { return {-r_, r_, -r_, r_}; }
    std::string describe() const override;
    bool closest_point_exact(Vec2 x, Vec2& out) const override;

private:
    double r_;
};

// r(theta) = r0 (1 + a cos(k theta))
class FlowerShape final : public Shape {
public:
    FlowerShape(double r0, double a, int k) : r0_(r0), a_(a), k_(k) {}
    double phi(Vec2 x) const override;
    Vec2 gradient(Vec2 x) const override;
    Box bbox() const override;
    std::string describe() const override;
    double polar_curvature(double theta) const;

private:
    double r0_, a_;
    int k_;
};

// Stadium: points within width/2 of the segment [-length/2, length/2] x {0}.
class CapsuleShape final : public Shape {
public:
    CapsuleShape(double length, double width) : len_(length), w_(width) {}
    double phi(Vec2 x) const override;
    Vec2 gradient(Vec2 x) const override;
    Box bbox() const override;
    std::string describe() const override;
    bool closest_point_exact(Vec2 x, Vec2& out) const override;

private:
    double len_, w_;
};

class ExpressionShape final : public Shape {
public:
    ExpressionShape(Expression e, Box box) : e_(std::move(e)), box_(box) {}
    double phi(Vec2 x) const override { return e_.eval(x.x, x.y); }
    Box bbox() const override { return box_; }
    std::string describe() const override { return "custom(" + e_.text() + ")"; }

private:
    Expression e_;
    Box box_;
};

}  // namespace aclab
