#pragma once

// Rounding kernel shared by the fixed-point and low-precision float paths.
// fi(x) = floor(x) with probability p and floor(x) + u otherwise.
// Representable inputs are returned unchanged by every scheme.

#include "lpgd/dyadic.hpp"
#include "lpgd/qnum.hpp"
#include "lpgd/random_stream.hpp"
#include "lpgd/scheme.hpp"

namespace lpgd {

// Direction of the SR_eps bias: sign(x) for sr_eps, sign(v) for signed_sr_eps,
// 0 otherwise.
int bias_direction(const RoundingScheme& scheme, int x_sign, int v_sign);

// p for a value whose position between the two candidates is frac in (0, 1)
// (units of the gap). lower_even is the parity of the lower candidate, used by
// RN ties.
Dyadic prob_down_kernel(const RoundingScheme& scheme, const Dyadic& frac, bool lower_even, int bias);

Dyadic prob_round_down(const Dyadic& x, QFormat fmt, const RoundingScheme& scheme, int v_sign = 0);
Dyadic prob_round_down(double x, QFormat fmt, const RoundingScheme& scheme, int v_sign = 0);

// Consumes exactly one draw from rng regardless of scheme, so variants that
// share a seed see aligned streams.
FixedVal round(const Dyadic& x, QFormat fmt, const RoundingScheme& scheme, RandomStream& rng, int v_sign = 0);
FixedVal round(double x, QFormat fmt, const RoundingScheme& scheme, RandomStream& rng, int v_sign = 0);

// floor(x) + u * (1 - p), exact.
Dyadic expected_round(const Dyadic& x, QFormat fmt, const RoundingScheme& scheme, int v_sign = 0);
Dyadic expected_round(double x, QFormat fmt, const RoundingScheme& scheme, int v_sign = 0);

}  // namespace lpgd
