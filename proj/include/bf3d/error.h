// Error types shared by all bf3d modules.
//
// Each category maps onto one CLI exit code (see ExitCodeFor in pipeline.h).

#ifndef BF3D_ERROR_H_
#define BF3D_ERROR_H_

#include <stdexcept>
#include <string>

namespace bf3d {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation applied to the wrong kind of feature map.
class TypeError : public Error {
 public:
  using Error::Error;
};

// Out-of-range microphone, pair or channel index.
class IndexError : public Error {
 public:
  using Error::Error;
};

// Mismatched dimensions between spectrograms, masks, weights or maps.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid scalar argument or inconsistent configuration.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Positions outside the room, non-positive distances, degenerate regions.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Singular systems or scenes with no usable energy.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Missing/unwritable files and malformed file contents.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bf3d

#endif  // BF3D_ERROR_H_
