#pragma once

#include <stdexcept>
#include <string>

namespace patchbound {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Diffusion tensor not s.p.d. or reaction coefficient negative at an evaluation point.
class InvalidCoefficient : public Error {
public:
    using Error::Error;
};

/// Ker(P_k) is not contained in Ker(A_k) (or Ker(B_k)), or A_k has a kernel P_k lacks.
/// The local bounds are meaningless in that case.
class KernelMismatch : public Error {
public:
    using Error::Error;
};

class NumericalDegeneracy : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

/// Dense oracle requested above its size cap.
class TooLarge : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

} // namespace patchbound
