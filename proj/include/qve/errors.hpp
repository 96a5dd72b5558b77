#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qve {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// model
struct AsymmetricKernel : Error { using Error::Error; };
struct NegativeEntry : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// solver
struct NonPositiveImaginaryPart : Error { using Error::Error; };
struct SingularJacobian : Error { using Error::Error; };
struct ZeroDistance : Error { using Error::Error; };

struct MaxIterExceeded : Error {
    MaxIterExceeded(std::string msg, std::vector<std::complex<double>> iterate,
                    double res)
        : Error(std::move(msg)), last_iterate(std::move(iterate)), residual(res) {}
    std::vector<std::complex<double>> last_iterate;
    double residual;
};

// density
struct InsufficientEtaLevels : Error { using Error::Error; };
struct TooCloseToGrid : Error { using Error::Error; };

// stability
struct ZeroComponent : Error { using Error::Error; };
struct GapTooSmall : Error { using Error::Error; };
struct SingularMatrix : Error { using Error::Error; };

// singularity
struct AmbiguousSign : Error { using Error::Error; };
struct DivisionDegenerate : Error { using Error::Error; };
struct EmptyWindow : Error { using Error::Error; };
struct NonPositiveDensity : Error { using Error::Error; };
struct TooLargeForExact : Error { using Error::Error; };

// ensembles
struct DegenerateBlock : Error { using Error::Error; };
struct AlphaOutOfRange : Error { using Error::Error; };
struct ComplexKernel : Error { using Error::Error; };
struct NegativeKernel : Error { using Error::Error; };
struct BranchUndefined : Error { using Error::Error; };

// montecarlo
struct EmptySamples : Error { using Error::Error; };

}  // namespace qve
