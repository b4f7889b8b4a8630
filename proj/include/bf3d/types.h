#ifndef BF3D_TYPES_H_
#define BF3D_TYPES_H_

#include <complex>
#include <vector>

namespace bf3d {

using Complex = std::complex<double>;
using Signal = std::vector<double>;
// Channel-major: signal[m][n].
using MultiSignal = std::vector<Signal>;

}  // namespace bf3d

#endif  // BF3D_TYPES_H_
