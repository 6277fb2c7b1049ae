#include "hedonia/models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hedonia/csv.hpp"

namespace hedonia {

// ---------- OLS ----------

double OlsModel::gamma() const {
    if (!has_gamma) throw NumericError("model has no visual coefficient");
    return beta.back();
}

double OlsModel::predict(const std::vector<double>& x) const {
    if (x.size() != beta.size())
        throw NumericError("predict: expected " + std::to_string(beta.size()) +
                           " columns, got " + std::to_string(x.size()));
    double yhat = beta0;
    for (std::size_t i = 0; i < beta.size(); ++i) yhat += beta[i] * x[i];
    return yhat;
}

OlsModel ols_fit(const std::vector<std::vector<double>>& rows,
                 const std::vector<double>& y,
                 const std::vector<std::string>& column_names) {
    const std::size_t n = rows.size();
    const std::size_t p = column_names.size();
    if (n != y.size()) throw NumericError("ols_fit: row/target size mismatch");
    if (n < p + 2) throw NumericError("ols_fit: need more rows than columns");

    Eigen::MatrixXd X(n, p + 1);
    Eigen::VectorXd yv(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != p)
            throw NumericError("ols_fit: ragged design row " + std::to_string(i));
        X(i, 0) = 1.0;
        for (std::size_t j = 0; j < p; ++j) X(i, j + 1) = rows[i][j];
        yv(i) = y[i];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(p + 1)) {
        const auto perm = qr.colsPermutation().indices();
        std::string bad;
        for (Eigen::Index k = qr.rank(); k < perm.size(); ++k) {
            const Eigen::Index col = perm(k);
            if (!bad.empty()) bad += ", ";
            bad += col == 0 ? "intercept" : column_names[col - 1];
        }
        throw NumericError("rank-deficient design; dependent columns: " + bad);
    }

    Eigen::VectorXd coef = qr.solve(yv);
    Eigen::VectorXd resid = yv - X * coef;

    OlsModel m;
    m.column_names = column_names;
    m.n_rows = n;
    m.beta0 = coef(0);
    m.beta.assign(coef.data() + 1, coef.data() + p + 1);
    m.rss = resid.squaredNorm();
    const double k = static_cast<double>(p + 1);
    m.sigma2 = m.rss / (n - k);

    Eigen::MatrixXd cov = m.sigma2 * (X.transpose() * X).inverse();
    for (std::size_t j = 0; j <= p; ++j) {
        const double se = std::sqrt(std::max(cov(j, j), 0.0));
        m.std_errors.push_back(se);
        m.t_values.push_back(se > 0 ? coef(j) / se : 0.0);
    }

    const double mean_y = yv.mean();
    const double ss_tot = (yv.array() - mean_y).square().sum();
    m.r2_train = 100.0 * (1.0 - m.rss / ss_tot);

    const double sigma2_mle = m.rss / static_cast<double>(n);
    const double loglik =
        -0.5 * static_cast<double>(n) *
        (std::log(2.0 * M_PI * sigma2_mle) + 1.0);
    m.aic = 2.0 * (k + 1.0) - 2.0 * loglik;
    m.gcv_score = static_cast<double>(n) * m.rss /
                  ((static_cast<double>(n) - k) * (static_cast<double>(n) - k));
    return m;
}

namespace {

const char* stars(double t) {
    const double a = std::abs(t);
    if (a > 2.576) return "***";
    if (a > 1.960) return "**";
    if (a > 1.645) return "*";
    return "";
}

std::string fixed(double v, int prec = 3) {
    std::ostringstream ss;
    ss.precision(prec);
    ss << std::fixed << v;
    return ss.str();
}

}  // namespace

std::string format_ols_report(const OlsModel& m) {
    std::ostringstream out;
    out << "Par,Est,Std.E.,T-val.,Sig\n";
    out << "Inter.," << fixed(m.beta0) << "," << fixed(m.std_errors[0]) << ","
        << fixed(m.t_values[0], 1) << "," << stars(m.t_values[0]) << "\n";
    for (std::size_t j = 0; j < m.beta.size(); ++j)
        out << m.column_names[j] << "," << fixed(m.beta[j]) << ","
            << fixed(m.std_errors[j + 1]) << "," << fixed(m.t_values[j + 1], 1)
            << "," << stars(m.t_values[j + 1]) << "\n";
    out << "AIC," << fixed(m.aic, 1) << ",,,\n";
    out << "GCV," << fixed(m.gcv_score, 4) << ",,,\n";
    return out.str();
}

OlsModel attributes_ols_fit(
    const std::vector<std::array<double, kNumAttributes>>& x,
    const std::vector<double>& y) {
    std::vector<std::vector<double>> rows;
    rows.reserve(x.size());
    for (const auto& r : x) rows.emplace_back(r.begin(), r.end());
    std::vector<std::string> names(kAttributeNames.begin(),
                                   kAttributeNames.end());
    return ols_fit(rows, y, names);
}

OlsModel hybrid_linear_fit(
    const std::vector<std::array<double, kNumAttributes>>& x,
    const std::vector<double>& vhat, const std::vector<double>& y) {
    if (vhat.size() != x.size())
        throw NumericError("hybrid_linear_fit: proxy column misaligned");
    std::vector<std::vector<double>> rows;
    rows.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::vector<double> r(x[i].begin(), x[i].end());
        r.push_back(vhat[i]);
        rows.push_back(std::move(r));
    }
    std::vector<std::string> names(kAttributeNames.begin(),
                                   kAttributeNames.end());
    names.push_back("vis");
    OlsModel m = ols_fit(rows, y, names);
    m.has_gamma = true;
    return m;
}

// ---------- network specs ----------

std::string InputConfig::name() const {
    std::string out;
    if (use_attributes) out += "X";
    if (use_street) out += out.empty() ? "S" : "+S";
    if (use_aerial) out += out.empty() ? "A" : "+A";
    return out;
}

NetworkSpec make_cnn_spec(int depth, std::size_t side) {
    // channels per conv and pool positions, by depth
    std::vector<std::size_t> channels;
    std::vector<bool> pool_after;
    switch (depth) {
        case 4:
            channels = {4, 8, 16, 32};
            pool_after = {true, true, true, true};
            break;
        case 8:
            channels = {4, 4, 8, 8, 16, 16, 32, 32};
            pool_after = {false, true, false, true, false, true, false, true};
            break;
        case 13:
            channels = {8, 8, 16, 16, 32, 32, 32, 64, 64, 64, 64, 64, 64};
            pool_after = {false, true,  false, true,  false, false, true,
                          false, false, true,  false, false, true};
            break;
        default:
            throw ConfigError("cnn depth must be 4, 8 or 13");
    }
    NetworkSpec spec;
    spec.input_shape = {side, side, 3};
    std::size_t cin = 3;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        spec.layers.push_back({LayerKind::Conv3x3, cin, channels[i]});
        spec.layers.push_back({LayerKind::Relu});
        if (pool_after[i]) spec.layers.push_back({LayerKind::MaxPool2x2});
        cin = channels[i];
    }
    spec.layers.push_back({LayerKind::Flatten});
    output_shape(spec);  // validate the side is divisible enough
    return spec;
}

NetworkSpec make_mlp_spec(std::size_t fan_in,
                          const std::vector<std::size_t>& hidden,
                          std::size_t fan_out, bool hidden_relu_after_last) {
    NetworkSpec spec;
    spec.input_shape = {fan_in};
    std::size_t cur = fan_in;
    for (std::size_t h : hidden) {
        spec.layers.push_back({LayerKind::Dense, cur, h});
        spec.layers.push_back({LayerKind::Relu});
        cur = h;
    }
    if (fan_out > 0) {
        spec.layers.push_back({LayerKind::Dense, cur, fan_out});
        if (hidden_relu_after_last) spec.layers.push_back({LayerKind::Relu});
    }
    return spec;
}

// ---------- composite training ----------

ModelRows select_rows(const std::vector<StreetRecord>& streets,
                      const std::vector<ImageSample>& images,
                      const std::vector<std::string>& ids) {
    std::map<std::string, const StreetRecord*> by_id;
    for (const auto& s : streets) by_id[s.street_id] = &s;
    std::map<std::string, const ImageSample*> img_by_id;
    for (const auto& s : images)
        if (s.valid) img_by_id[s.street_id] = &s;
    ModelRows rows;
    for (const auto& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw DataError("unknown street id: " + id);
        rows.street_ids.push_back(id);
        rows.x.push_back(it->second->x);
        rows.y.push_back(it->second->y);
        auto img = img_by_id.find(id);
        rows.images.push_back(img == img_by_id.end() ? nullptr : img->second);
    }
    return rows;
}

namespace {

// One optional branch per input source plus a fusion/response head.
struct Composite {
    bool use_attr = false, use_street = false, use_aerial = false;
    NetworkSpec attr_spec, street_spec, aerial_spec, head_spec;
    Weights attr_w, street_w, aerial_w, head_w;
};

Tensor attr_batch(const ModelRows& rows, const std::vector<std::size_t>& idx) {
    Tensor t({idx.size(), kNumAttributes});
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t d = 0; d < kNumAttributes; ++d)
            t.data[i * kNumAttributes + d] = rows.x[idx[i]][d];
    return t;
}

Tensor image_batch(const ModelRows& rows, const std::vector<std::size_t>& idx,
                   bool aerial, std::size_t side) {
    Tensor t({idx.size(), side, side, 3});
    const std::size_t stride = side * side * 3;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const ImageSample* s = rows.images[idx[i]];
        if (!s)
            throw DataError("missing images for street " +
                            rows.street_ids[idx[i]]);
        const Tensor& img = aerial ? s->aerial_image : s->street_image;
        if (img.size() != stride)
            throw DataError("image side mismatch for street " +
                            rows.street_ids[idx[i]]);
        std::copy(img.data.begin(), img.data.end(),
                  t.data.begin() + static_cast<std::ptrdiff_t>(i * stride));
    }
    return t;
}

Tensor concat_columns(const std::vector<const Tensor*>& parts) {
    const std::size_t n = parts[0]->shape[0];
    std::size_t total = 0;
    for (const Tensor* p : parts) total += p->shape[1];
    Tensor out({n, total});
    std::size_t offset = 0;
    for (const Tensor* p : parts) {
        const std::size_t w = p->shape[1];
        for (std::size_t i = 0; i < n; ++i)
            std::copy(p->data.begin() + static_cast<std::ptrdiff_t>(i * w),
                      p->data.begin() + static_cast<std::ptrdiff_t>((i + 1) * w),
                      out.data.begin() +
                          static_cast<std::ptrdiff_t>(i * total + offset));
        offset += w;
    }
    return out;
}

std::vector<Tensor> split_columns(const Tensor& grad,
                                  const std::vector<std::size_t>& widths) {
    const std::size_t n = grad.shape[0];
    std::vector<Tensor> parts;
    std::size_t offset = 0;
    const std::size_t total = grad.shape[1];
    for (std::size_t w : widths) {
        Tensor p({n, w});
        for (std::size_t i = 0; i < n; ++i)
            std::copy(
                grad.data.begin() + static_cast<std::ptrdiff_t>(i * total + offset),
                grad.data.begin() +
                    static_cast<std::ptrdiff_t>(i * total + offset + w),
                p.data.begin() + static_cast<std::ptrdiff_t>(i * w));
        parts.push_back(std::move(p));
        offset += w;
    }
    return parts;
}

struct ForwardCache {
    ActivationTrace attr_tr, street_tr, aerial_tr, head_tr;
    Tensor concat_in;
    std::vector<std::size_t> widths;
};

ForwardCache composite_forward(const Composite& c, const ModelRows& rows,
                               const std::vector<std::size_t>& idx,
                               std::size_t side) {
    ForwardCache f;
    std::vector<const Tensor*> feats;
    if (c.use_attr) {
        f.attr_tr = forward(c.attr_spec, c.attr_w, attr_batch(rows, idx));
        feats.push_back(&f.attr_tr.final());
    }
    if (c.use_street) {
        f.street_tr = forward(c.street_spec, c.street_w,
                              image_batch(rows, idx, false, side));
        feats.push_back(&f.street_tr.final());
    }
    if (c.use_aerial) {
        f.aerial_tr = forward(c.aerial_spec, c.aerial_w,
                              image_batch(rows, idx, true, side));
        feats.push_back(&f.aerial_tr.final());
    }
    for (const Tensor* t : feats) f.widths.push_back(t->shape[1]);
    f.concat_in = feats.size() == 1 ? *feats[0] : concat_columns(feats);
    f.head_tr = forward(c.head_spec, c.head_w, f.concat_in);
    return f;
}

struct CompositeAdam {
    AdamState attr, street, aerial, head;
};

void composite_step(Composite& c, CompositeAdam& adam, const ForwardCache& f,
                    const Tensor& loss_grad) {
    auto head_back = backward(c.head_spec, c.head_w, f.head_tr, loss_grad);
    std::vector<Tensor> parts =
        f.widths.size() == 1
            ? std::vector<Tensor>{}
            : split_columns(head_back.input_grad, f.widths);
    auto part = [&](std::size_t i) -> const Tensor& {
        return f.widths.size() == 1 ? head_back.input_grad : parts[i];
    };
    std::size_t pi = 0;
    if (c.use_attr) {
        auto g = backward(c.attr_spec, c.attr_w, f.attr_tr, part(pi++));
        adam_step(c.attr_w, g.grads, adam.attr);
    }
    if (c.use_street) {
        auto g = backward(c.street_spec, c.street_w, f.street_tr, part(pi++));
        adam_step(c.street_w, g.grads, adam.street);
    }
    if (c.use_aerial) {
        auto g = backward(c.aerial_spec, c.aerial_w, f.aerial_tr, part(pi++));
        adam_step(c.aerial_w, g.grads, adam.aerial);
    }
    adam_step(c.head_w, head_back.grads, adam.head);
}

std::vector<double> composite_predict(const Composite& c, const ModelRows& rows,
                                      double y_offset, std::size_t side,
                                      std::size_t batch_size) {
    std::vector<double> out;
    out.reserve(rows.size());
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < rows.size(); start += batch_size) {
        idx.clear();
        for (std::size_t i = start; i < std::min(start + batch_size, rows.size());
             ++i)
            idx.push_back(i);
        ForwardCache f = composite_forward(c, rows, idx, side);
        for (std::size_t i = 0; i < idx.size(); ++i)
            out.push_back(f.head_tr.final().data[i] + y_offset);
    }
    return out;
}

double mse_of(const std::vector<double>& pred, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        s += (pred[i] - y[i]) * (pred[i] - y[i]);
    return s / static_cast<double>(pred.size());
}

struct TrainOutcome {
    std::vector<EpochStats> history;
    std::size_t best_epoch = 0;
};

// Minibatch ADAM with per-epoch reshuffle; keeps the best-validation
// weights. targets are centered by the caller.
TrainOutcome train_composite(Composite& c, const ModelRows& train,
                             const std::vector<double>& train_target,
                             const ModelRows& val,
                             const std::vector<double>& val_target,
                             double y_offset, const TrainOptions& opts) {
    Rng rng(opts.seed ^ 0x9e3779b97f4a7c15ull);
    CompositeAdam adam{AdamState::for_weights(c.attr_w, opts.learning_rate),
                       AdamState::for_weights(c.street_w, opts.learning_rate),
                       AdamState::for_weights(c.aerial_w, opts.learning_rate),
                       AdamState::for_weights(c.head_w, opts.learning_rate)};
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    TrainOutcome outcome;
    double best_val = std::numeric_limits<double>::infinity();
    Composite best = c;
    for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
        rng.shuffle(order);
        double train_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += opts.batch_size) {
            const std::vector<std::size_t> idx(
                order.begin() + static_cast<std::ptrdiff_t>(start),
                order.begin() + static_cast<std::ptrdiff_t>(std::min(
                                    start + opts.batch_size, order.size())));
            ForwardCache f = composite_forward(c, train, idx, opts.image_side);
            Tensor target({idx.size(), 1});
            for (std::size_t i = 0; i < idx.size(); ++i)
                target.data[i] = train_target[idx[i]] - y_offset;
            MseResult loss = mse_loss(f.head_tr.final(), target);
            if (!std::isfinite(loss.loss))
                throw NumericError("non-finite training loss (divergence)");
            train_loss += loss.loss;
            ++batches;
            composite_step(c, adam, f, loss.grad);
        }
        const std::vector<double> val_pred =
            composite_predict(c, val, y_offset, opts.image_side, 64);
        const double val_mse = mse_of(val_pred, val_target);
        outcome.history.push_back({train_loss / std::max<std::size_t>(batches, 1),
                                   val_mse});
        if (val_mse < best_val) {
            best_val = val_mse;
            best = c;
            outcome.best_epoch = epoch;
        }
    }
    c = best;
    return outcome;
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) /
           static_cast<double>(v.size());
}

Composite build_composite(const InputConfig& inputs, const TrainOptions& opts,
                          Rng& rng) {
    Composite c;
    c.use_attr = inputs.use_attributes;
    c.use_street = inputs.use_street;
    c.use_aerial = inputs.use_aerial;
    std::size_t fusion_in = 0;
    if (c.use_attr) {
        c.attr_spec = make_mlp_spec(kNumAttributes, {128, 64}, 0, false);
        c.attr_w = init_weights(c.attr_spec, rng);
        fusion_in += 64;
    }
    if (c.use_street) {
        c.street_spec = make_cnn_spec(opts.cnn_depth, opts.image_side);
        c.street_w = init_weights(c.street_spec, rng);
        fusion_in += output_shape(c.street_spec)[0];
    }
    if (c.use_aerial) {
        c.aerial_spec = make_cnn_spec(opts.cnn_depth, opts.image_side);
        c.aerial_w = init_weights(c.aerial_spec, rng);
        fusion_in += output_shape(c.aerial_spec)[0];
    }
    if (fusion_in == 0)
        throw ConfigError("at least one input source must be selected");
    // Attribute-only: a single response layer on the 64-wide feature
    // vector; with images, an additional 128/64 fully-connected network.
    const bool images = c.use_street || c.use_aerial;
    c.head_spec = images ? make_mlp_spec(fusion_in, {128, 64}, 1, false)
                         : make_mlp_spec(fusion_in, {}, 1, false);
    c.head_w = init_weights(c.head_spec, rng);
    return c;
}

void require_images(const ModelRows& rows, const InputConfig& inputs) {
    if (!inputs.use_street && !inputs.use_aerial) return;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (!rows.images[i])
            throw DataError("configuration " + inputs.name() +
                            " requires images, missing for street " +
                            rows.street_ids[i]);
}

}  // namespace

std::vector<double> FullModel::predict(const ModelRows& rows,
                                       std::size_t batch_size) const {
    Composite c{inputs.use_attributes, inputs.use_street, inputs.use_aerial,
                attr_spec,  street_spec, aerial_spec, fusion_spec,
                attr_w,     street_w,    aerial_w,    fusion_w};
    const std::size_t side =
        inputs.use_street || inputs.use_aerial
            ? street_spec.input_shape.empty() ? aerial_spec.input_shape[0]
                                              : street_spec.input_shape[0]
            : 0;
    return composite_predict(c, rows, y_offset, side, batch_size);
}

FullModel full_model_fit(const ModelRows& train, const ModelRows& val,
                         const InputConfig& inputs, const TrainOptions& opts) {
    if (train.size() == 0 || val.size() == 0)
        throw DataError("empty train or validation fold");
    require_images(train, inputs);
    require_images(val, inputs);
    Rng rng(opts.seed);
    Composite c = build_composite(inputs, opts, rng);

    FullModel m;
    m.inputs = inputs;
    m.cnn_depth = opts.cnn_depth;
    m.y_offset = mean_of(train.y);
    TrainOutcome out =
        train_composite(c, train, train.y, val, val.y, m.y_offset, opts);
    m.attr_spec = std::move(c.attr_spec);
    m.street_spec = std::move(c.street_spec);
    m.aerial_spec = std::move(c.aerial_spec);
    m.fusion_spec = std::move(c.head_spec);
    m.attr_w = std::move(c.attr_w);
    m.street_w = std::move(c.street_w);
    m.aerial_w = std::move(c.aerial_w);
    m.fusion_w = std::move(c.head_w);
    m.history = std::move(out.history);
    m.best_epoch = out.best_epoch;
    return m;
}

FullModel fit_attribute_perceptron(const ModelRows& train, const ModelRows& val,
                                   const TrainOptions& opts) {
    return full_model_fit(train, val, {true, false, false}, opts);
}

namespace {

void write_meta(const std::string& path,
                const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ofstream f(path);
    for (const auto& [k, v] : kv) f << k << "=" << v << "\n";
    if (!f) throw DataError("cannot write model metadata: " + path);
}

std::map<std::string, std::string> read_meta(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot read model metadata: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(f, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

}  // namespace

void FullModel::save(const std::string& path) const {
    std::vector<CheckpointSection> sections;
    if (inputs.use_attributes) sections.push_back({"attr", attr_spec, attr_w});
    if (inputs.use_street) sections.push_back({"street", street_spec, street_w});
    if (inputs.use_aerial) sections.push_back({"aerial", aerial_spec, aerial_w});
    sections.push_back({"fusion", fusion_spec, fusion_w});
    save_checkpoint(path, sections);
    write_meta(path + ".meta.txt",
               {{"kind", "full_model"},
                {"inputs", inputs.name()},
                {"cnn_depth", std::to_string(cnn_depth)},
                {"y_offset", format_double(y_offset)}});
}

FullModel FullModel::load(const std::string& path) {
    FullModel m;
    auto meta = read_meta(path + ".meta.txt");
    const std::string inputs = meta.at("inputs");
    m.inputs = {inputs.find('X') != std::string::npos,
                inputs.find('S') != std::string::npos,
                inputs.find('A') != std::string::npos};
    m.cnn_depth = std::stoi(meta.at("cnn_depth"));
    m.y_offset = std::stod(meta.at("y_offset"));
    for (auto& s : load_checkpoint(path)) {
        if (s.name == "attr") {
            m.attr_spec = std::move(s.spec);
            m.attr_w = std::move(s.weights);
        } else if (s.name == "street") {
            m.street_spec = std::move(s.spec);
            m.street_w = std::move(s.weights);
        } else if (s.name == "aerial") {
            m.aerial_spec = std::move(s.spec);
            m.aerial_w = std::move(s.weights);
        } else if (s.name == "fusion") {
            m.fusion_spec = std::move(s.spec);
            m.fusion_w = std::move(s.weights);
        }
    }
    return m;
}

std::vector<double> VisualHeadModel::score(
    const std::vector<const ImageSample*>& images,
    std::size_t batch_size) const {
    ModelRows rows;
    for (const ImageSample* s : images) {
        rows.street_ids.push_back(s->street_id);
        rows.x.push_back({});
        rows.y.push_back(0.0);
        rows.images.push_back(s);
    }
    Composite c{false,       true,      true,     {}, street_spec, aerial_spec,
                head_spec,   {},        street_w, aerial_w,
                head_w};
    return composite_predict(c, rows, 0.0, street_spec.input_shape[0],
                             batch_size);
}

void VisualHeadModel::save(const std::string& path) const {
    save_checkpoint(path, {{"street", street_spec, street_w},
                           {"aerial", aerial_spec, aerial_w},
                           {"head", head_spec, head_w}});
    write_meta(path + ".meta.txt", {{"kind", "visual_head"},
                                    {"cnn_depth", std::to_string(cnn_depth)}});
}

VisualHeadModel VisualHeadModel::load(const std::string& path) {
    VisualHeadModel m;
    auto meta = read_meta(path + ".meta.txt");
    m.cnn_depth = std::stoi(meta.at("cnn_depth"));
    for (auto& s : load_checkpoint(path)) {
        if (s.name == "street") {
            m.street_spec = std::move(s.spec);
            m.street_w = std::move(s.weights);
        } else if (s.name == "aerial") {
            m.aerial_spec = std::move(s.spec);
            m.aerial_w = std::move(s.weights);
        } else if (s.name == "head") {
            m.head_spec = std::move(s.spec);
            m.head_w = std::move(s.weights);
        }
    }
    return m;
}

TwoStageResult two_stage_train(const ModelRows& train, const ModelRows& val,
                               const std::vector<ImageSample>& score_images,
                               const TrainOptions& opts) {
    TwoStageResult res;
    res.stage1 = fit_attribute_perceptron(train, val, opts);

    // Residuals R = Y - H(X) become the stage-2 target.
    std::vector<double> train_resid = res.stage1.predict(train);
    std::vector<double> val_resid = res.stage1.predict(val);
    for (std::size_t i = 0; i < train_resid.size(); ++i)
        train_resid[i] = train.y[i] - train_resid[i];
    for (std::size_t i = 0; i < val_resid.size(); ++i)
        val_resid[i] = val.y[i] - val_resid[i];

    InputConfig both_images{false, true, true};
    require_images(train, both_images);
    require_images(val, both_images);

    Rng rng(opts.seed + 1);
    Composite c;
    c.use_street = true;
    c.use_aerial = true;
    c.street_spec = make_cnn_spec(opts.cnn_depth, opts.image_side);
    c.street_w = init_weights(c.street_spec, rng);
    c.aerial_spec = make_cnn_spec(opts.cnn_depth, opts.image_side);
    c.aerial_w = init_weights(c.aerial_spec, rng);
    const std::size_t fusion_in =
        output_shape(c.street_spec)[0] + output_shape(c.aerial_spec)[0];
    // two fully-connected layers compressing concat(F, G) to one scalar
    c.head_spec = make_mlp_spec(fusion_in, {64}, 1, false);
    c.head_w = init_weights(c.head_spec, rng);

    TrainOutcome out =
        train_composite(c, train, train_resid, val, val_resid, 0.0, opts);

    res.visual.cnn_depth = opts.cnn_depth;
    res.visual.street_spec = std::move(c.street_spec);
    res.visual.aerial_spec = std::move(c.aerial_spec);
    res.visual.head_spec = std::move(c.head_spec);
    res.visual.street_w = std::move(c.street_w);
    res.visual.aerial_w = std::move(c.aerial_w);
    res.visual.head_w = std::move(c.head_w);
    res.visual.history = std::move(out.history);
    res.visual.best_epoch = out.best_epoch;

    const auto scorable = valid_samples(score_images);
    const std::vector<double> scores = res.visual.score(scorable);
    for (std::size_t i = 0; i < scorable.size(); ++i)
        res.proxy[scorable[i]->street_id] = scores[i];
    return res;
}

}  // namespace hedonia
