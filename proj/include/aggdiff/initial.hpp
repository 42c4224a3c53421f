#pragma once

#include <array>

#include "aggdiff/grid.hpp"

namespace aggdiff {

// Gaussian bump scaled so the discrete mass is exactly `mass`.
Field make_gaussian(const GridSpec& g, double mass, double sigma,
                    const std::array<double, 3>& center = {0, 0, 0});

// Indicator of a ball, scaled to discrete mass `mass`.
Field make_ball(const GridSpec& g, double mass, double radius,
                const std::array<double, 3>& center = {0, 0, 0});

// Source solution of u_t = Lap(u^m):
//   B(x,t) = t^(-alpha) (C - kappa |x|^2 t^(-2 beta))_+^(1/(m-1)),
//   beta = 1/(d(m-1)+2), alpha = d beta, kappa = (m-1) beta / (2m).
double barenblatt_value(int d, double m, double C, double t, double r);

Field make_barenblatt(const GridSpec& g, double m, double t, double C,
                      const std::array<double, 3>& center = {0, 0, 0});

} // namespace aggdiff
