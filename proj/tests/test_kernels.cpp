#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hedonia/kernels.hpp"
#include "hedonia/rng.hpp"

#include <vector>

using namespace hedonia;
using namespace hedonia::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

}  // namespace

TEST_CASE("conv3x3: all-ones kernel over all-ones 3x3 patch sums to 9 at center") {
    ConvDims d{1, 3, 3, 1, 1};
    std::vector<double> in(9, 1.0), w(9, 1.0), b(1, 0.0), out(9, 0.0);
    serial::conv3x3_forward(in.data(), d, w.data(), b.data(), out.data());
    CHECK(out[4] == doctest::Approx(9.0));  // center: full 3x3 support
    CHECK(out[0] == doctest::Approx(4.0));  // corner: zero padding
}

TEST_CASE("serial and omp kernels agree bit-for-bit") {
    Rng rng(99);
    ConvDims d{3, 8, 6, 4, 5};
    const std::size_t in_n = d.n * d.h * d.w * d.cin;
    const std::size_t out_n = d.n * d.h * d.w * d.cout;
    auto in = random_vec(in_n, rng);
    auto w = random_vec(d.cout * 9 * d.cin, rng);
    auto b = random_vec(d.cout, rng);

    std::vector<double> o1(out_n), o2(out_n);
    serial::conv3x3_forward(in.data(), d, w.data(), b.data(), o1.data());
    omp::conv3x3_forward(in.data(), d, w.data(), b.data(), o2.data());
    CHECK(o1 == o2);

    auto gout = random_vec(out_n, rng);
    std::vector<double> gi1(in_n), gi2(in_n);
    serial::conv3x3_backward_input(gout.data(), d, w.data(), gi1.data());
    omp::conv3x3_backward_input(gout.data(), d, w.data(), gi2.data());
    CHECK(gi1 == gi2);

    std::vector<double> gw1(w.size()), gw2(w.size()), gb1(d.cout), gb2(d.cout);
    serial::conv3x3_backward_params(in.data(), gout.data(), d, gw1.data(),
                                    gb1.data());
    omp::conv3x3_backward_params(in.data(), gout.data(), d, gw2.data(),
                                 gb2.data());
    CHECK(gw1 == gw2);
    CHECK(gb1 == gb2);

    // maxpool
    auto pin = random_vec(2 * 8 * 8 * 3, rng);
    std::vector<double> po1(2 * 4 * 4 * 3), po2(po1.size());
    std::vector<std::uint32_t> am1(po1.size()), am2(po1.size());
    serial::maxpool2x2_forward(pin.data(), 2, 8, 8, 3, po1.data(), am1.data());
    omp::maxpool2x2_forward(pin.data(), 2, 8, 8, 3, po2.data(), am2.data());
    CHECK(po1 == po2);
    CHECK(am1 == am2);
    auto pgout = random_vec(po1.size(), rng);
    std::vector<double> pg1(pin.size()), pg2(pin.size());
    serial::maxpool2x2_backward(pgout.data(), 2, 8, 8, 3, am1.data(), pg1.data());
    omp::maxpool2x2_backward(pgout.data(), 2, 8, 8, 3, am2.data(), pg2.data());
    CHECK(pg1 == pg2);

    // dense
    auto din = random_vec(7 * 11, rng);
    auto dw = random_vec(5 * 11, rng);
    auto db = random_vec(5, rng);
    std::vector<double> do1(7 * 5), do2(7 * 5);
    serial::dense_forward(din.data(), 7, 11, dw.data(), db.data(), 5, do1.data());
    omp::dense_forward(din.data(), 7, 11, dw.data(), db.data(), 5, do2.data());
    CHECK(do1 == do2);
    auto dgout = random_vec(7 * 5, rng);
    std::vector<double> dgi1(7 * 11), dgi2(7 * 11);
    serial::dense_backward_input(dgout.data(), 7, 11, dw.data(), 5, dgi1.data());
    omp::dense_backward_input(dgout.data(), 7, 11, dw.data(), 5, dgi2.data());
    CHECK(dgi1 == dgi2);
    std::vector<double> dgw1(dw.size()), dgw2(dw.size()), dgb1(5), dgb2(5);
    serial::dense_backward_params(din.data(), dgout.data(), 7, 11, 5,
                                  dgw1.data(), dgb1.data());
    omp::dense_backward_params(din.data(), dgout.data(), 7, 11, 5, dgw2.data(),
                               dgb2.data());
    CHECK(dgw1 == dgw2);
    CHECK(dgb1 == dgb2);
}

TEST_CASE("maxpool picks the max and routes gradient to the argmax slot") {
    std::vector<double> in = {1, 5, 2, 8};  // 2x2, 1 channel
    std::vector<double> out(1);
    std::vector<std::uint32_t> am(1);
    serial::maxpool2x2_forward(in.data(), 1, 2, 2, 1, out.data(), am.data());
    CHECK(out[0] == 8.0);
    std::vector<double> gout = {3.0}, gin(4, -1.0);
    serial::maxpool2x2_backward(gout.data(), 1, 2, 2, 1, am.data(), gin.data());
    CHECK(gin == std::vector<double>{0, 0, 0, 3.0});
}

TEST_CASE("dense identity weights reproduce input") {
    std::vector<double> in = {1.0, 2.0};
    std::vector<double> w = {1, 0, 0, 1}, b = {0, 0}, out(2);
    serial::dense_forward(in.data(), 1, 2, w.data(), b.data(), 2, out.data());
    CHECK(out == in);
}
