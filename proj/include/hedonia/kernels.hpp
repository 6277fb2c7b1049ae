#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel layer kernels in two builds: a serial reference and an
// OpenMP version. Both share one signature set; tests hold them to exact
// agreement. Layouts: activations NHWC, conv weights [oc][ky][kx][ic],
// dense weights [out][in]. The OpenMP kernels parallelize only over loop
// indices that own their output slots, so results are bit-identical to
// the serial path regardless of thread count.

namespace hedonia::kernels {

struct ConvDims {
    std::size_t n, h, w, cin, cout;
};

namespace serial {

void conv3x3_forward(const double* in, const ConvDims& d, const double* weight,
                     const double* bias, double* out);
void conv3x3_backward_input(const double* gout, const ConvDims& d,
                            const double* weight, double* gin);
void conv3x3_backward_params(const double* in, const double* gout,
                             const ConvDims& d, double* gweight, double* gbias);

void maxpool2x2_forward(const double* in, std::size_t n, std::size_t h,
                        std::size_t w, std::size_t c, double* out,
                        std::uint32_t* argmax);
void maxpool2x2_backward(const double* gout, std::size_t n, std::size_t h,
                         std::size_t w, std::size_t c,
                         const std::uint32_t* argmax, double* gin);

void dense_forward(const double* in, std::size_t n, std::size_t din,
                   const double* weight, const double* bias, std::size_t dout,
                   double* out);
void dense_backward_input(const double* gout, std::size_t n, std::size_t din,
                          const double* weight, std::size_t dout, double* gin);
void dense_backward_params(const double* in, const double* gout, std::size_t n,
                           std::size_t din, std::size_t dout, double* gweight,
                           double* gbias);

void relu_forward(const double* in, std::size_t n, double* out);
void relu_backward(const double* in, const double* gout, std::size_t n,
                   double* gin);

}  // namespace serial

namespace omp {

void conv3x3_forward(const double* in, const ConvDims& d, const double* weight,
                     const double* bias, double* out);
void conv3x3_backward_input(const double* gout, const ConvDims& d,
                            const double* weight, double* gin);
void conv3x3_backward_params(const double* in, const double* gout,
                             const ConvDims& d, double* gweight, double* gbias);

void maxpool2x2_forward(const double* in, std::size_t n, std::size_t h,
                        std::size_t w, std::size_t c, double* out,
                        std::uint32_t* argmax);
void maxpool2x2_backward(const double* gout, std::size_t n, std::size_t h,
                         std::size_t w, std::size_t c,
                         const std::uint32_t* argmax, double* gin);

void dense_forward(const double* in, std::size_t n, std::size_t din,
                   const double* weight, const double* bias, std::size_t dout,
                   double* out);
void dense_backward_input(const double* gout, std::size_t n, std::size_t din,
                          const double* weight, std::size_t dout, double* gin);
void dense_backward_params(const double* in, const double* gout, std::size_t n,
                           std::size_t din, std::size_t dout, double* gweight,
                           double* gbias);

void relu_forward(const double* in, std::size_t n, double* out);
void relu_backward(const double* in, const double* gout, std::size_t n,
                   double* gin);

}  // namespace omp

enum class Backend { Serial, Omp };

// Process-wide kernel selection; defaults to Omp.
Backend backend();
void set_backend(Backend b);

}  // namespace hedonia::kernels
