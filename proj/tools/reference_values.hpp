#pragma once

// Reference operating points for 64-QAM in unit-variance complex Gaussian
// noise, with the tolerances the acceptance suite and preset summaries
// check against. MI in nats, percentages as (design - target) / design.

namespace pfshape::reference {

struct Band {
    double value;
    double tol;
    constexpr bool contains(double x) const { return x >= value - tol && x <= value + tol; }
};

// max|x|^2 = 20, Ebar = 20: the power constraint is slack.
inline constexpr double kWideMaxEnergy = 20.0;
inline constexpr Band kUnconstrainedEnergy{11.91, 0.03};

// max|x|^2 = 10: C(E) saturates.
inline constexpr double kNarrowMaxEnergy = 10.0;
inline constexpr Band kPlateauEnergy{6.98, 0.05};
inline constexpr Band kPlateauCapacity{1.83, 0.01};

// Single design point at Ebar = 5.20, max|x|^2 = 20.
inline constexpr double kDesignEbar = 5.20;
inline constexpr double kDesignTargetEnergy = 5.20;
inline constexpr double kDesignTargetMi = 1.81;
inline constexpr Band kN1Energy{5.82, 0.05};
inline constexpr Band kN1Mi{1.90, 0.02};
inline constexpr Band kN1EnergyGapPct{10.65, 1.0};
inline constexpr Band kN1MiGapPct{4.74, 0.5};
inline constexpr Band kN2Energy{5.28, 0.05};
inline constexpr Band kN2Mi{1.82, 0.02};
inline constexpr double kN2EnergyGapPct = 1.52;
inline constexpr double kN2MiGapPct = 0.55;

// Gaps to C(infinity) at max|x|^2 = 10.
inline constexpr Band kSgPeakEnergy{6.50, 0.05};
inline constexpr Band kSgGapPct{-4.55, 0.3};
inline constexpr Band kHuffmanGapPct{-4.52, 0.3};
inline constexpr Band kGhcGapPct{-0.39, 0.2};

// Capacity PMFs shown as 8x8 maps.
inline constexpr double kPmfMapEbars[] = {2.5, 5.0, 10.0, 20.0};

// Energy sweep granularity.
inline constexpr double kGridLo = 2.5;
inline constexpr double kGridStep = 0.1;
inline constexpr double kGridHi = 12.0;

} // namespace pfshape::reference
