#include "hedonia/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "hedonia/kernels.hpp"

namespace hedonia {

const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv3x3: return "conv3x3";
        case LayerKind::MaxPool2x2: return "maxpool2x2";
        case LayerKind::Dense: return "dense";
        case LayerKind::Relu: return "relu";
        case LayerKind::Flatten: return "flatten";
        case LayerKind::Concat: return "concat";
    }
    return "unknown";
}

std::size_t layer_param_count(const LayerSpec& layer) {
    switch (layer.kind) {
        case LayerKind::Conv3x3:
            return layer.fan_out * 9 * layer.fan_in + layer.fan_out;
        case LayerKind::Dense:
            return layer.fan_out * layer.fan_in + layer.fan_out;
        default:
            return 0;
    }
}

std::size_t total_param_count(const NetworkSpec& spec) {
    std::size_t n = 0;
    for (const auto& l : spec.layers) n += layer_param_count(l);
    return n;
}

namespace {

[[noreturn]] void layer_error(std::size_t idx, const LayerSpec& l,
                              const std::string& msg) {
    throw NumericError("layer " + std::to_string(idx) + " (" +
                       layer_kind_name(l.kind) + "): " + msg);
}

}  // namespace

std::vector<std::vector<std::size_t>> layer_shapes(const NetworkSpec& spec) {
    std::vector<std::vector<std::size_t>> shapes;
    std::vector<std::size_t> cur = spec.input_shape;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        switch (l.kind) {
            case LayerKind::Conv3x3:
                if (cur.size() != 3 || cur[2] != l.fan_in)
                    layer_error(i, l, "expected HxWx" + std::to_string(l.fan_in) +
                                          " input, got " + shape_to_string(cur));
                cur = {cur[0], cur[1], l.fan_out};
                break;
            case LayerKind::MaxPool2x2:
                if (cur.size() != 3 || cur[0] % 2 || cur[1] % 2)
                    layer_error(i, l, "expected rank-3 input with even H/W, got " +
                                          shape_to_string(cur));
                cur = {cur[0] / 2, cur[1] / 2, cur[2]};
                break;
            case LayerKind::Dense:
                if (cur.size() != 1 || cur[0] != l.fan_in)
                    layer_error(i, l, "expected flat input of width " +
                                          std::to_string(l.fan_in) + ", got " +
                                          shape_to_string(cur));
                cur = {l.fan_out};
                break;
            case LayerKind::Relu:
                break;
            case LayerKind::Flatten:
                cur = {Tensor::size_from_shape(cur)};
                break;
            case LayerKind::Concat:
                layer_error(i, l, "concat layers are composed at the model "
                                  "level, not inside a sequential net");
        }
        shapes.push_back(cur);
    }
    return shapes;
}

std::vector<std::size_t> output_shape(const NetworkSpec& spec) {
    auto shapes = layer_shapes(spec);
    return shapes.empty() ? spec.input_shape : shapes.back();
}

Weights init_weights(const NetworkSpec& spec, Rng& rng) {
    layer_shapes(spec);  // validate
    Weights w;
    for (const auto& l : spec.layers) {
        std::vector<double> p(layer_param_count(l), 0.0);
        if (l.kind == LayerKind::Conv3x3) {
            const double limit = std::sqrt(6.0 / (9.0 * double(l.fan_in)));
            const std::size_t nw = l.fan_out * 9 * l.fan_in;
            for (std::size_t i = 0; i < nw; ++i) p[i] = rng.uniform(-limit, limit);
        } else if (l.kind == LayerKind::Dense) {
            const double limit =
                std::sqrt(6.0 / (double(l.fan_in) + double(l.fan_out)));
            const std::size_t nw = l.fan_out * l.fan_in;
            for (std::size_t i = 0; i < nw; ++i) p[i] = rng.uniform(-limit, limit);
        }
        w.layers.push_back(std::move(p));
    }
    return w;
}

Weights zero_like(const Weights& w) {
    Weights z;
    for (const auto& l : w.layers) z.layers.emplace_back(l.size(), 0.0);
    return z;
}

void accumulate(Weights& acc, const GradientBundle& g, double scale) {
    for (std::size_t i = 0; i < acc.layers.size(); ++i)
        for (std::size_t j = 0; j < acc.layers[i].size(); ++j)
            acc.layers[i][j] += scale * g[i][j];
}

namespace {

using kernels::Backend;
using kernels::ConvDims;

#define DISPATCH(fn, ...)                                  \
    (kernels::backend() == Backend::Serial                 \
         ? kernels::serial::fn(__VA_ARGS__)                \
         : kernels::omp::fn(__VA_ARGS__))

}  // namespace

ActivationTrace forward(const NetworkSpec& spec, const Weights& weights,
                        const Tensor& input) {
    if (input.shape.size() != spec.input_shape.size() + 1 ||
        !std::equal(spec.input_shape.begin(), spec.input_shape.end(),
                    input.shape.begin() + 1))
        throw NumericError("network input shape mismatch: expected [Nx" +
                           shape_to_string(spec.input_shape).substr(1) +
                           ", got " + shape_to_string(input.shape));
    const std::size_t batch = input.shape[0];
    const auto shapes = layer_shapes(spec);

    ActivationTrace trace;
    trace.input = input;
    const Tensor* cur = &trace.input;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        std::vector<std::size_t> out_shape = shapes[i];
        out_shape.insert(out_shape.begin(), batch);
        Tensor out(out_shape);
        switch (l.kind) {
            case LayerKind::Conv3x3: {
                ConvDims d{batch, cur->shape[1], cur->shape[2], l.fan_in,
                           l.fan_out};
                const double* w = weights.layers[i].data();
                const double* b = w + l.fan_out * 9 * l.fan_in;
                DISPATCH(conv3x3_forward, cur->ptr(), d, w, b, out.ptr());
                break;
            }
            case LayerKind::MaxPool2x2: {
                std::vector<std::uint32_t> argmax(out.size());
                DISPATCH(maxpool2x2_forward, cur->ptr(), batch, cur->shape[1],
                         cur->shape[2], cur->shape[3], out.ptr(), argmax.data());
                trace.argmaxes.push_back(std::move(argmax));
                break;
            }
            case LayerKind::Dense: {
                const double* w = weights.layers[i].data();
                const double* b = w + l.fan_out * l.fan_in;
                DISPATCH(dense_forward, cur->ptr(), batch, l.fan_in, w, b,
                         l.fan_out, out.ptr());
                break;
            }
            case LayerKind::Relu:
                DISPATCH(relu_forward, cur->ptr(), cur->size(), out.ptr());
                break;
            case LayerKind::Flatten:
                out.data = cur->data;
                break;
            case LayerKind::Concat:
                layer_error(i, l, "concat inside sequential forward");
        }
        out.require_finite("forward output of layer " + std::to_string(i));
        trace.outputs.push_back(std::move(out));
        cur = &trace.outputs.back();
    }
    return trace;
}

BackwardResult backward(const NetworkSpec& spec, const Weights& weights,
                        const ActivationTrace& trace,
                        const Tensor& output_grad) {
    if (trace.outputs.size() != spec.layers.size())
        throw NumericError("trace and network layer counts differ");
    if (output_grad.shape != trace.final().shape)
        throw NumericError("output_grad shape does not match trace output");
    const std::size_t batch = trace.input.shape[0];

    BackwardResult res;
    res.grads.resize(spec.layers.size());
    Tensor gout = output_grad;
    std::size_t pool_idx = trace.argmaxes.size();
    for (std::size_t ii = spec.layers.size(); ii-- > 0;) {
        const LayerSpec& l = spec.layers[ii];
        const Tensor& in = ii == 0 ? trace.input : trace.outputs[ii - 1];
        Tensor gin(in.shape);
        res.grads[ii].assign(layer_param_count(l), 0.0);
        switch (l.kind) {
            case LayerKind::Conv3x3: {
                ConvDims d{batch, in.shape[1], in.shape[2], l.fan_in, l.fan_out};
                const double* w = weights.layers[ii].data();
                double* gw = res.grads[ii].data();
                double* gb = gw + l.fan_out * 9 * l.fan_in;
                DISPATCH(conv3x3_backward_params, in.ptr(), gout.ptr(), d, gw,
                         gb);
                DISPATCH(conv3x3_backward_input, gout.ptr(), d, w, gin.ptr());
                break;
            }
            case LayerKind::MaxPool2x2: {
                const auto& argmax = trace.argmaxes[--pool_idx];
                DISPATCH(maxpool2x2_backward, gout.ptr(), batch, in.shape[1],
                         in.shape[2], in.shape[3], argmax.data(), gin.ptr());
                break;
            }
            case LayerKind::Dense: {
                const double* w = weights.layers[ii].data();
                double* gw = res.grads[ii].data();
                double* gb = gw + l.fan_out * l.fan_in;
                DISPATCH(dense_backward_params, in.ptr(), gout.ptr(), batch,
                         l.fan_in, l.fan_out, gw, gb);
                DISPATCH(dense_backward_input, gout.ptr(), batch, l.fan_in, w,
                         l.fan_out, gin.ptr());
                break;
            }
            case LayerKind::Relu:
                DISPATCH(relu_backward, in.ptr(), gout.ptr(), in.size(),
                         gin.ptr());
                break;
            case LayerKind::Flatten:
                gin.data = gout.data;
                break;
            case LayerKind::Concat:
                layer_error(ii, l, "concat inside sequential backward");
        }
        gout = std::move(gin);
    }
    res.input_grad = std::move(gout);
    return res;
}

MseResult mse_loss(const Tensor& pred, const Tensor& target) {
    if (pred.size() != target.size() || pred.size() == 0)
        throw NumericError("mse_loss: length mismatch or empty input");
    const double n = static_cast<double>(pred.size());
    MseResult res;
    res.grad = Tensor(pred.shape);
    double loss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = target.data[i] - pred.data[i];
        loss += d * d;
        res.grad.data[i] = -2.0 * d / n;
    }
    res.loss = loss / n;
    return res;
}

namespace {

constexpr char kMagic[4] = {'H', 'E', 'D', 'W'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& f, T v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& f) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw DataError("truncated checkpoint file");
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<CheckpointSection>& sections) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open checkpoint for writing: " + path);
    f.write(kMagic, 4);
    write_pod(f, kVersion);
    write_pod(f, static_cast<std::uint32_t>(sections.size()));
    for (const auto& s : sections) {
        write_pod(f, static_cast<std::uint32_t>(s.name.size()));
        f.write(s.name.data(), static_cast<std::streamsize>(s.name.size()));
        write_pod(f, static_cast<std::uint32_t>(s.spec.input_shape.size()));
        for (std::size_t d : s.spec.input_shape)
            write_pod(f, static_cast<std::uint64_t>(d));
        write_pod(f, static_cast<std::uint32_t>(s.spec.layers.size()));
        for (const auto& l : s.spec.layers) {
            write_pod(f, static_cast<std::uint8_t>(l.kind));
            write_pod(f, static_cast<std::uint64_t>(l.fan_in));
            write_pod(f, static_cast<std::uint64_t>(l.fan_out));
        }
        for (const auto& p : s.weights.layers) {
            write_pod(f, static_cast<std::uint64_t>(p.size()));
            f.write(reinterpret_cast<const char*>(p.data()),
                    static_cast<std::streamsize>(p.size() * sizeof(double)));
        }
    }
    if (!f) throw DataError("checkpoint write failed: " + path);

    std::ofstream m(path + ".manifest.txt");
    m << "checkpoint_version " << kVersion << "\n";
    for (const auto& s : sections) {
        m << "section " << s.name << " input "
          << shape_to_string(s.spec.input_shape) << "\n";
        for (std::size_t i = 0; i < s.spec.layers.size(); ++i) {
            const auto& l = s.spec.layers[i];
            m << "  layer " << i << " " << layer_kind_name(l.kind) << " "
              << l.fan_in << " " << l.fan_out << " params "
              << layer_param_count(l) << "\n";
        }
    }
}

std::vector<CheckpointSection> load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open checkpoint: " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("bad checkpoint magic: " + path);
    if (read_pod<std::uint32_t>(f) != kVersion)
        throw DataError("unsupported checkpoint version: " + path);
    const auto nsec = read_pod<std::uint32_t>(f);
    std::vector<CheckpointSection> sections(nsec);
    for (auto& s : sections) {
        const auto namelen = read_pod<std::uint32_t>(f);
        s.name.resize(namelen);
        f.read(s.name.data(), namelen);
        const auto rank = read_pod<std::uint32_t>(f);
        s.spec.input_shape.resize(rank);
        for (auto& d : s.spec.input_shape)
            d = static_cast<std::size_t>(read_pod<std::uint64_t>(f));
        const auto nlayers = read_pod<std::uint32_t>(f);
        s.spec.layers.resize(nlayers);
        for (auto& l : s.spec.layers) {
            l.kind = static_cast<LayerKind>(read_pod<std::uint8_t>(f));
            l.fan_in = static_cast<std::size_t>(read_pod<std::uint64_t>(f));
            l.fan_out = static_cast<std::size_t>(read_pod<std::uint64_t>(f));
        }
        s.weights.layers.resize(nlayers);
        for (std::size_t i = 0; i < nlayers; ++i) {
            const auto np = read_pod<std::uint64_t>(f);
            if (np != layer_param_count(s.spec.layers[i]))
                throw DataError("checkpoint layer " + std::to_string(i) +
                                " parameter count mismatch");
            s.weights.layers[i].resize(np);
            f.read(reinterpret_cast<char*>(s.weights.layers[i].data()),
                   static_cast<std::streamsize>(np * sizeof(double)));
            if (!f) throw DataError("truncated checkpoint file");
        }
    }
    return sections;
}

}  // namespace hedonia
