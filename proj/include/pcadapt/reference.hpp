#pragma once

#include "pcadapt/discrepancy.hpp"
#include "pcadapt/matrix.hpp"

// Slow, obviously-correct implementations used to cross-check the production
// statistics. Everything here is written as plain double loops straight from
// the definitions and deliberately shares no code with discrepancy.cpp.
namespace pcadapt::reference {

double gaussian_kernel(const double* a, const double* b, std::size_t d, double sigma);

// Squared multi-kernel MMD by summing kernel evaluations term by term.
double mk_mmd2(const Matrix& xs, const Matrix& xt, const KernelFamily& family);

// CORAL from entrywise covariance sums.
double coral(const Matrix& xs, const Matrix& xt);

}  // namespace pcadapt::reference
