// Tolerances and sizes of the acceptance criteria, shared by the CLI
// summary, the acceptance binary and the unit tests.
#pragma once

namespace sobolev_lab::criteria {

// condition numbers and spectra
inline constexpr int kLandscapePoints = 1000;
inline constexpr double kKappaRelTol = 1e-8;
inline constexpr double kThetaStrict = 1e-6;
inline constexpr double kSpectrumTol = 1e-9;
inline constexpr double kLandscapeSeconds = 10.0;

// one GD step
inline constexpr int kGdPoints = 500;
inline constexpr double kGdEtaFactor = 0.9;
inline constexpr double kGdTheta0Tol = 1e-12;

// gradient flow
inline constexpr int kFlowInits = 100;
inline constexpr int kFlowDim = 8;
inline constexpr double kFlowStep = 1e-3;
inline constexpr double kFlowEnd = 10.0;
inline constexpr double kFlowTarget = 1e-8;
inline constexpr double kFlowSeconds = 30.0;

// quadratic forms
inline constexpr int kFormGrid = 1000;
inline constexpr double kLambdaTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;

// ReLU² node
inline constexpr int kRelusqPoints = 1000;
inline constexpr int kRelusqInits = 100;
inline constexpr int kRelusqDim = 4;

// multi-node
inline constexpr double kReachTol = 1e-6;
inline constexpr double kRatioTol = 1e-4;
inline constexpr double kRatioLo = 1.8;
inline constexpr double kRatioHi = 2.2;
inline constexpr double kDecayRelTol = 0.02;
inline constexpr double kSaddleTol = 1e-9;
inline constexpr double kSaddleFieldTol = 1e-10;
inline constexpr double kSaddlePrintedL2 = 0.534158;  // K = 2, six printed decimals
inline constexpr double kSaddlePrintedH1 = 0.454577;
inline constexpr double kPrintedDecimalsTol = 5e-7;
inline constexpr double kToeplitzTol = 1e-6;

// Monte-Carlo
inline constexpr double kSlopeLo = -1.2;
inline constexpr double kSlopeHi = -0.8;
inline constexpr double kZMax = 4.0;
inline constexpr double kMcSeconds = 300.0;

// SGD
inline constexpr double kSgdSeconds = 120.0;

// linear model
inline constexpr double kVarianceRelTol = 0.03;

// Chebyshev
inline constexpr double kChebTolPerN2 = 1e-10;

}  // namespace sobolev_lab::criteria
