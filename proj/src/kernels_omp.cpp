#include "hedonia/kernels.hpp"

#define HEDONIA_OMP
#define HEDONIA_KERNEL_NS omp
#include "kernels_impl.inl"
#undef HEDONIA_KERNEL_NS
#undef HEDONIA_OMP

namespace hedonia::kernels {

namespace {
Backend g_backend = Backend::Omp;
}

Backend backend() { return g_backend; }
void set_backend(Backend b) { g_backend = b; }

}  // namespace hedonia::kernels
