#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mvldp/triple.hpp"

namespace mvldp::test {

inline ModelConfig linear(double a, double kappa, double sigma, double x0, double T = 1.0) {
    ModelConfig m;
    m.kind = ModelKind::linear_sde;
    m.n = 1;
    m.T = T;
    m.a = a;
    m.kappa = kappa;
    m.sigma = sigma;
    m.marks = {{1.0}, {1.0}};
    m.initial = {x0};
    return m;
}

inline ModelConfig pde(ModelKind kind, std::size_t n, double exponent, double kappa = 0.0) {
    ModelConfig m;
    m.kind = kind;
    m.n = n;
    m.exponent = exponent;
    m.kappa = kappa;
    m.sigma = 0.3;
    m.marks = {{-1.0, 1.0}, {0.5, 0.5}};
    m.initial = {0.5};
    return m;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace mvldp::test
