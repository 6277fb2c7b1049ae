// Shared kernel bodies, included once for the serial reference and once for
// the OpenMP build (HEDONIA_OMP defined). Pragmas only annotate loops whose
// iterations own disjoint output slots; accumulation order inside an
// iteration is identical in both builds, so outputs match bit for bit.

#ifdef HEDONIA_OMP
#define HEDONIA_PARALLEL_FOR _Pragma("omp parallel for schedule(static)")
#define HEDONIA_PARALLEL_FOR_2 _Pragma("omp parallel for collapse(2) schedule(static)")
#else
#define HEDONIA_PARALLEL_FOR
#define HEDONIA_PARALLEL_FOR_2
#endif

namespace hedonia::kernels::HEDONIA_KERNEL_NS {

void conv3x3_forward(const double* in, const ConvDims& d, const double* weight,
                     const double* bias, double* out) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(d.n);
    const std::ptrdiff_t h = d.h, w = d.w, cin = d.cin, cout = d.cout;
    HEDONIA_PARALLEL_FOR_2
    for (std::ptrdiff_t b = 0; b < n; ++b) {
        for (std::ptrdiff_t y = 0; y < h; ++y) {
            for (std::ptrdiff_t x = 0; x < w; ++x) {
                double* orow = out + ((b * h + y) * w + x) * cout;
                for (std::ptrdiff_t oc = 0; oc < cout; ++oc) orow[oc] = bias[oc];
                for (std::ptrdiff_t ky = 0; ky < 3; ++ky) {
                    const std::ptrdiff_t iy = y + ky - 1;
                    if (iy < 0 || iy >= h) continue;
                    for (std::ptrdiff_t kx = 0; kx < 3; ++kx) {
                        const std::ptrdiff_t ix = x + kx - 1;
                        if (ix < 0 || ix >= w) continue;
                        const double* irow = in + ((b * h + iy) * w + ix) * cin;
                        const double* wtap = weight + (ky * 3 + kx) * cin;
                        for (std::ptrdiff_t oc = 0; oc < cout; ++oc) {
                            const double* wrow = wtap + oc * 9 * cin;
                            double acc = 0.0;
                            for (std::ptrdiff_t ic = 0; ic < cin; ++ic)
                                acc += irow[ic] * wrow[ic];
                            orow[oc] += acc;
                        }
                    }
                }
            }
        }
    }
}

void conv3x3_backward_input(const double* gout, const ConvDims& d,
                            const double* weight, double* gin) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(d.n);
    const std::ptrdiff_t h = d.h, w = d.w, cin = d.cin, cout = d.cout;
    HEDONIA_PARALLEL_FOR_2
    for (std::ptrdiff_t b = 0; b < n; ++b) {
        for (std::ptrdiff_t iy = 0; iy < h; ++iy) {
            for (std::ptrdiff_t ix = 0; ix < w; ++ix) {
                double* grow = gin + ((b * h + iy) * w + ix) * cin;
                for (std::ptrdiff_t ic = 0; ic < cin; ++ic) grow[ic] = 0.0;
                for (std::ptrdiff_t ky = 0; ky < 3; ++ky) {
                    const std::ptrdiff_t y = iy - ky + 1;
                    if (y < 0 || y >= h) continue;
                    for (std::ptrdiff_t kx = 0; kx < 3; ++kx) {
                        const std::ptrdiff_t x = ix - kx + 1;
                        if (x < 0 || x >= w) continue;
                        const double* gorow = gout + ((b * h + y) * w + x) * cout;
                        const double* wtap = weight + (ky * 3 + kx) * cin;
                        for (std::ptrdiff_t oc = 0; oc < cout; ++oc) {
                            const double g = gorow[oc];
                            const double* wrow = wtap + oc * 9 * cin;
                            for (std::ptrdiff_t ic = 0; ic < cin; ++ic)
                                grow[ic] += g * wrow[ic];
                        }
                    }
                }
            }
        }
    }
}

void conv3x3_backward_params(const double* in, const double* gout,
                             const ConvDims& d, double* gweight,
                             double* gbias) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(d.n);
    const std::ptrdiff_t h = d.h, w = d.w, cin = d.cin, cout = d.cout;
    HEDONIA_PARALLEL_FOR
    for (std::ptrdiff_t oc = 0; oc < cout; ++oc) {
        double* gw = gweight + oc * 9 * cin;
        for (std::ptrdiff_t k = 0; k < 9 * cin; ++k) gw[k] = 0.0;
        double gb = 0.0;
        for (std::ptrdiff_t b = 0; b < n; ++b) {
            for (std::ptrdiff_t y = 0; y < h; ++y) {
                for (std::ptrdiff_t x = 0; x < w; ++x) {
                    const double g = gout[((b * h + y) * w + x) * cout + oc];
                    if (g == 0.0) continue;
                    gb += g;
                    for (std::ptrdiff_t ky = 0; ky < 3; ++ky) {
                        const std::ptrdiff_t iy = y + ky - 1;
                        if (iy < 0 || iy >= h) continue;
                        for (std::ptrdiff_t kx = 0; kx < 3; ++kx) {
                            const std::ptrdiff_t ix = x + kx - 1;
                            if (ix < 0 || ix >= w) continue;
                            const double* irow =
                                in + ((b * h + iy) * w + ix) * cin;
                            double* gwtap = gw + (ky * 3 + kx) * cin;
                            for (std::ptrdiff_t ic = 0; ic < cin; ++ic)
                                gwtap[ic] += g * irow[ic];
                        }
                    }
                }
            }
        }
        gbias[oc] = gb;
    }
}

void maxpool2x2_forward(const double* in, std::size_t ns, std::size_t hs,
                        std::size_t ws, std::size_t cs, double* out,
                        std::uint32_t* argmax) {
    const std::ptrdiff_t n = ns, h = hs, w = ws, c = cs;
    const std::ptrdiff_t oh = h / 2, ow = w / 2;
    HEDONIA_PARALLEL_FOR_2
    for (std::ptrdiff_t b = 0; b < n; ++b) {
        for (std::ptrdiff_t y = 0; y < oh; ++y) {
            for (std::ptrdiff_t x = 0; x < ow; ++x) {
                for (std::ptrdiff_t ch = 0; ch < c; ++ch) {
                    double best = -1e308;
                    std::uint32_t code = 0;
                    for (std::ptrdiff_t dy = 0; dy < 2; ++dy) {
                        for (std::ptrdiff_t dx = 0; dx < 2; ++dx) {
                            const double v =
                                in[((b * h + 2 * y + dy) * w + 2 * x + dx) * c +
                                   ch];
                            if (v > best) {
                                best = v;
                                code = static_cast<std::uint32_t>(dy * 2 + dx);
                            }
                        }
                    }
                    const std::ptrdiff_t o = ((b * oh + y) * ow + x) * c + ch;
                    out[o] = best;
                    argmax[o] = code;
                }
            }
        }
    }
}

void maxpool2x2_backward(const double* gout, std::size_t ns, std::size_t hs,
                         std::size_t ws, std::size_t cs,
                         const std::uint32_t* argmax, double* gin) {
    const std::ptrdiff_t n = ns, h = hs, w = ws, c = cs;
    const std::ptrdiff_t oh = h / 2, ow = w / 2;
    HEDONIA_PARALLEL_FOR_2
    for (std::ptrdiff_t b = 0; b < n; ++b) {
        for (std::ptrdiff_t y = 0; y < oh; ++y) {
            for (std::ptrdiff_t x = 0; x < ow; ++x) {
                for (std::ptrdiff_t ch = 0; ch < c; ++ch) {
                    const std::ptrdiff_t o = ((b * oh + y) * ow + x) * c + ch;
                    const std::uint32_t code = argmax[o];
                    for (std::ptrdiff_t dy = 0; dy < 2; ++dy) {
                        for (std::ptrdiff_t dx = 0; dx < 2; ++dx) {
                            const std::ptrdiff_t i =
                                ((b * h + 2 * y + dy) * w + 2 * x + dx) * c + ch;
                            gin[i] = (static_cast<std::uint32_t>(dy * 2 + dx) ==
                                      code)
                                         ? gout[o]
                                         : 0.0;
                        }
                    }
                }
            }
        }
    }
}

void dense_forward(const double* in, std::size_t ns, std::size_t dins,
                   const double* weight, const double* bias, std::size_t douts,
                   double* out) {
    const std::ptrdiff_t n = ns, din = dins, dout = douts;
    HEDONIA_PARALLEL_FOR_2
    for (std::ptrdiff_t b = 0; b < n; ++b) {
        for (std::ptrdiff_t o = 0; o < dout; ++o) {
            const double* irow = in + b * din;
            const double* wrow = weight + o * din;
            double acc = bias[o];
            for (std::ptrdiff_t i = 0; i < din; ++i) acc += irow[i] * wrow[i];
            out[b * dout + o] = acc;
        }
    }
}

void dense_backward_input(const double* gout, std::size_t ns, std::size_t dins,
                          const double* weight, std::size_t douts,
                          double* gin) {
    const std::ptrdiff_t n = ns, din = dins, dout = douts;
    HEDONIA_PARALLEL_FOR
    for (std::ptrdiff_t b = 0; b < n; ++b) {
        double* grow = gin + b * din;
        for (std::ptrdiff_t i = 0; i < din; ++i) grow[i] = 0.0;
        const double* gorow = gout + b * dout;
        for (std::ptrdiff_t o = 0; o < dout; ++o) {
            const double g = gorow[o];
            const double* wrow = weight + o * din;
            for (std::ptrdiff_t i = 0; i < din; ++i) grow[i] += g * wrow[i];
        }
    }
}

void dense_backward_params(const double* in, const double* gout,
                           std::size_t ns, std::size_t dins, std::size_t douts,
                           double* gweight, double* gbias) {
    const std::ptrdiff_t n = ns, din = dins, dout = douts;
    HEDONIA_PARALLEL_FOR
    for (std::ptrdiff_t o = 0; o < dout; ++o) {
        double* gwrow = gweight + o * din;
        for (std::ptrdiff_t i = 0; i < din; ++i) gwrow[i] = 0.0;
        double gb = 0.0;
        for (std::ptrdiff_t b = 0; b < n; ++b) {
            const double g = gout[b * dout + o];
            gb += g;
            const double* irow = in + b * din;
            for (std::ptrdiff_t i = 0; i < din; ++i) gwrow[i] += g * irow[i];
        }
        gbias[o] = gb;
    }
}

void relu_forward(const double* in, std::size_t ns, double* out) {
    const std::ptrdiff_t n = ns;
    HEDONIA_PARALLEL_FOR
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward(const double* in, const double* gout, std::size_t ns,
                   double* gin) {
    const std::ptrdiff_t n = ns;
    HEDONIA_PARALLEL_FOR
    for (std::ptrdiff_t i = 0; i < n; ++i)
        gin[i] = in[i] > 0.0 ? gout[i] : 0.0;
}

}  // namespace hedonia::kernels::HEDONIA_KERNEL_NS

#undef HEDONIA_PARALLEL_FOR
#undef HEDONIA_PARALLEL_FOR_2
