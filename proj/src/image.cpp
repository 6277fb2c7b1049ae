#include "hedonia/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace hedonia {

namespace {

int read_ppm_token(std::ifstream& f) {
    // Skips whitespace and '#' comments between header tokens.
    int c = f.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#')
            while (c != EOF && c != '\n') c = f.get();
        c = f.get();
    }
    int value = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        any = true;
        c = f.get();
    }
    if (!any) throw DataError("malformed PPM header");
    return value;
}

}  // namespace

Tensor read_ppm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open image: " + path);
    char m0 = 0, m1 = 0;
    f.get(m0);
    f.get(m1);
    if (m0 != 'P' || m1 != '6') throw DataError("not a binary PPM: " + path);
    const int w = read_ppm_token(f);
    const int h = read_ppm_token(f);
    const int maxval = read_ppm_token(f);
    if (w <= 0 || h <= 0 || maxval != 255)
        throw DataError("unsupported PPM dimensions/maxval: " + path);
    std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h * 3);
    f.read(reinterpret_cast<char*>(raw.data()),
           static_cast<std::streamsize>(raw.size()));
    if (!f) throw DataError("truncated PPM: " + path);
    Tensor img({static_cast<std::size_t>(h), static_cast<std::size_t>(w), 3});
    for (std::size_t i = 0; i < raw.size(); ++i)
        img.data[i] = raw[i] / 255.0;
    return img;
}

void write_ppm(const std::string& path, const Tensor& image) {
    if (image.shape.size() != 3 || image.shape[2] != 3)
        throw DataError("write_ppm expects an HxWx3 tensor");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open image for writing: " + path);
    f << "P6\n" << image.shape[1] << " " << image.shape[0] << "\n255\n";
    std::vector<unsigned char> raw(image.size());
    for (std::size_t i = 0; i < image.size(); ++i) {
        const double v = std::clamp(image.data[i], 0.0, 1.0);
        raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    f.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
    if (!f) throw DataError("image write failed: " + path);
}

Tensor resize_bilinear(const Tensor& image, std::size_t side) {
    if (image.shape.size() != 3) throw DataError("resize expects HxWxC");
    const std::size_t h = image.shape[0], w = image.shape[1],
                      c = image.shape[2];
    if (h == side && w == side) return image;
    Tensor out({side, side, c});
    const double sy = static_cast<double>(h) / static_cast<double>(side);
    const double sx = static_cast<double>(w) / static_cast<double>(side);
    for (std::size_t y = 0; y < side; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0,
                                     static_cast<double>(h - 1));
        const std::size_t y0 = static_cast<std::size_t>(fy);
        const std::size_t y1 = std::min(y0 + 1, h - 1);
        const double wy = fy - static_cast<double>(y0);
        for (std::size_t x = 0; x < side; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0,
                                         static_cast<double>(w - 1));
            const std::size_t x0 = static_cast<std::size_t>(fx);
            const std::size_t x1 = std::min(x0 + 1, w - 1);
            const double wx = fx - static_cast<double>(x0);
            for (std::size_t ch = 0; ch < c; ++ch) {
                const double v00 = image.data[(y0 * w + x0) * c + ch];
                const double v01 = image.data[(y0 * w + x1) * c + ch];
                const double v10 = image.data[(y1 * w + x0) * c + ch];
                const double v11 = image.data[(y1 * w + x1) * c + ch];
                out.data[(y * side + x) * c + ch] =
                    (1 - wy) * ((1 - wx) * v00 + wx * v01) +
                    wy * ((1 - wx) * v10 + wx * v11);
            }
        }
    }
    return out;
}

double channel_mean(const Tensor& image, std::size_t channel) {
    const std::size_t c = image.shape[2];
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = channel; i < image.size(); i += c, ++n)
        sum += image.data[i];
    return n ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace hedonia
