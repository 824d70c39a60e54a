#pragma once

#include <complex>
#include <vector>

#include "pomq/hyper.hpp"

namespace pomq {

// Projection by direct expansion of the decomposition of unity, without
// memoization: P o = o - sum_{n+m>=1} (-1)^n/(n!m!) xi+^n pi+^m P xi-^m pi-^n o.
// Works in the source algebra, so the projector must be embedded.
OperatorExpr naive_project(const OperatorExpr& o, const Projector& p, int max_degree = 6);

// <state| W(xi^n pi^m) |state> for one mode, with W the symmetrized product,
// evaluated by Gauss-Hermite quadrature in the Schroedinger representation.
// state_poly lists coefficients of q(xi) in psi = q(xi) exp(-xi^2/(2 hbar)).
std::complex<double> coherent_moment(int n, int m, double hbar = 1.0, const std::vector<double>& state_poly = {1.0});

struct UncertaintyReport {
    double dxi = 0;
    double dpi = 0;
    double product = 0;
    double bound = 0;
    bool minimal = false;
};

UncertaintyReport uncertainty_check(double hbar = 1.0, const std::vector<double>& state_poly = {1.0});

}  // namespace pomq
