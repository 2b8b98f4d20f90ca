#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace singsurf {

// Exact rational coefficient type. Arbitrary precision so that iterated
// blowup substitutions never overflow.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

}  // namespace singsurf
