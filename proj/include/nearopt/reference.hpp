#pragma once

// Published reference values for the bundled benchmark tables, embedded so
// reproduction runs never depend on network access, plus the tolerances the
// reproduction harness enforces.

#include <array>
#include <cstdint>
#include <vector>

namespace nearopt::reference {

// --- Tolerances -------------------------------------------------------------

// Two-arm scenario table: exact computation, tolerance is table rounding only.
inline constexpr double kScenarioProbTol = 5e-5 + 1e-12;   // +/- 0.005 percentage points
inline constexpr double kScenarioLossTol = 5e-5 + 1e-12;

// Two-arm near-optimality table (full 1000-point grid rows).
inline constexpr double kTwoArmNearOptTol = 2e-4;
// Extended rows evaluated with coarse-to-fine refinement.
inline constexpr double kTwoArmNearOptExtendedTol = 5e-4;

// Worst-case diagnostics at n = 100 per arm.
inline constexpr double kArgmaxStateTol = 1e-3;   // grid resolution
inline constexpr double kErrorProbTol = 1e-3;

// Five-arm scenario table at 10^6 simulations.
inline constexpr double kFiveArmProbTol = 2e-3;   // +/- 0.2 percentage points
inline constexpr double kFiveArmLossTol = 5e-4;

// Five-arm near-optimality table, desk budgets (step 3 at 10^7 simulations).
inline constexpr double kFiveArmEsTol = 1e-3;
inline constexpr double kFiveArmTestTol = 2e-3;

// Type-I calibration of the two-arm test rule at equal means.
inline constexpr double kTypeICalibrationTol = 3e-3;  // 0.3 percentage points

// Dunnett critical value versus the Monte Carlo oracle.
inline constexpr double kDunnettOracleTol = 5e-3;

// --- Table 1: two-arm scenarios, 100 standard care vs 99 new ---------------

struct TwoArmScenario {
  double new_mortality;        // standard care fixed at 0.25
  double test_p_standard;      // hypothesis test: P[prescribe standard care]
  double test_p_new;           // as printed; complementary up to rounding
  double test_expected_loss;
  double es_p_standard;        // empirical success rule
  double es_p_new;
  double es_expected_loss;
};

inline constexpr double kTable1StandardMortality = 0.25;
inline constexpr std::array<int, 2> kTable1Design{100, 99};

inline constexpr std::array<TwoArmScenario, 7> kTable1{{
    {0.40, 1.0000, 0.0000, 0.0000, 0.9895, 0.0105, 0.0016},
    {0.35, 0.9998, 0.0002, 0.0000, 0.9428, 0.0572, 0.0057},
    {0.30, 0.9970, 0.0030, 0.0002, 0.7961, 0.2039, 0.0102},
    {0.25, 0.9750, 0.0250, 0.0000, 0.5164, 0.4836, 0.0000},
    {0.20, 0.8676, 0.1324, 0.0434, 0.2118, 0.7882, 0.0106},
    {0.15, 0.5736, 0.4264, 0.0574, 0.0422, 0.9578, 0.0042},
    {0.10, 0.1892, 0.8108, 0.0284, 0.0026, 0.9974, 0.0004},
}};

// --- Table 2: two-arm near-optimality, equal arms ---------------------------

struct TwoArmNearOpt {
  int per_arm;
  double test_value;
  double es_value;
};

inline constexpr std::array<TwoArmNearOpt, 12> kTable2{{
    {20, 0.1685, 0.0269},
    {30, 0.1304, 0.0220},
    {50, 0.0990, 0.0170},
    {100, 0.0705, 0.0120},
    {200, 0.0510, 0.0085},
    {500, 0.0319, 0.0054},
    {1000, 0.0228, 0.0038},
    {2000, 0.0161, 0.0027},
    {4000, 0.0115, 0.0019},
    {5000, 0.0102, 0.0017},
    {10000, 0.0073, 0.0012},
    {15000, 0.0059, 0.0010},
}};

inline constexpr int kTable2DeskMaxPerArm = 1000;

// Worst-case diagnostics quoted for the n = 100 row, in mortality terms.
// For equal arms the exact regret surface is invariant under
// (p1, p2) -> (1 - p2, 1 - p1), so each argmax is a two-state orbit.
inline constexpr double kTestArgmaxNewMortality = 0.548;
inline constexpr double kTestArgmaxStandardMortality = 0.661;
inline constexpr double kTestArgmaxErrorProb = 0.624;
inline constexpr double kEsArgmaxNewMortality = 0.473;
inline constexpr double kEsArgmaxStandardMortality = 0.527;
inline constexpr double kEsArgmaxErrorProb = 0.226;

// --- Table 3: five-arm scenario, 500:250:250:250:250 ------------------------

inline constexpr std::array<int, 5> kTable3Design{500, 250, 250, 250, 250};
inline constexpr std::array<double, 5> kTable3Mortality{0.25, 0.15, 0.20, 0.30, 0.35};
inline constexpr std::array<double, 5> kTable3DunnettProbs{0.2565, 0.7060, 0.0375, 0.0, 0.0};
inline constexpr double kTable3DunnettLoss = 0.0275;
inline constexpr std::array<double, 5> kTable3EsProbs{0.0002, 0.9295, 0.0703, 0.0, 0.0};
inline constexpr double kTable3EsLoss = 0.0035;

// --- Table 4: five-arm near-optimality ---------------------------------------

struct FiveArmNearOpt {
  std::array<int, 5> design;
  double test_value;  // two-sided Dunnett at 5%
  double es_value;
};

inline constexpr std::array<FiveArmNearOpt, 10> kTable4{{
    {{100, 50, 50, 50, 50}, 0.1224, 0.0362},
    {{60, 60, 60, 60, 60}, 0.1251, 0.0343},
    {{200, 100, 100, 100, 100}, 0.0855, 0.0256},
    {{120, 120, 120, 120, 120}, 0.0859, 0.0243},
    {{500, 250, 250, 250, 250}, 0.0532, 0.0160},
    {{300, 300, 300, 300, 300}, 0.0563, 0.0153},
    {{1000, 500, 500, 500, 500}, 0.0380, 0.0112},
    {{600, 600, 600, 600, 600}, 0.0390, 0.0107},
    {{2000, 1000, 1000, 1000, 1000}, 0.0274, 0.0080},
    {{1200, 1200, 1200, 1200, 1200}, 0.0291, 0.0076},
}};

// Desk-scale reproduction covers the two smallest designs.
inline constexpr int kTable4DeskDesigns = 2;

}  // namespace nearopt::reference
