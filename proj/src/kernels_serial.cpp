#include "hedonia/kernels.hpp"

#define HEDONIA_KERNEL_NS serial
#include "kernels_impl.inl"
#undef HEDONIA_KERNEL_NS
