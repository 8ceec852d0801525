#pragma once

namespace phonopulse {

// Physical constants, CODATA/SI exact values. All frequencies and rates in
// this library are ordinary frequencies in Hz (the "/2pi" convention);
// angular quantities are formed at the point of use.
inline constexpr double kPlanck = 6.62607015e-34;   // J s
inline constexpr double kBoltzmann = 1.380649e-23;  // J / K
inline constexpr double kSpeedOfLight = 2.99792458e8;  // m / s

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 6.28318530717958647692;

}  // namespace phonopulse
