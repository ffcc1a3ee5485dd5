#include "erl/models.hpp"
#include "erl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace erl {

std::vector<double> softmax(const std::vector<double>& z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(z[i] - zmax);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

double cross_entropy(int true_class, const std::vector<double>& p, double weight) {
    const double clamped =
        std::clamp(p[static_cast<std::size_t>(true_class)], 1e-12, 1.0);
    return -weight * std::log(clamped);
}

int argmax_class(const std::vector<double>& p) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(p.size()); ++i)
        if (p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(best)]) best = i;
    return best;
}

void Standardizer::fit(const DataMatrix& X) {
    mean.assign(X.cols, 0.0);
    scale.assign(X.cols, 1.0);
    if (X.rows == 0) return;
    for (std::size_t r = 0; r < X.rows; ++r)
        for (std::size_t c = 0; c < X.cols; ++c) mean[c] += X.at(r, c);
    for (auto& m : mean) m /= static_cast<double>(X.rows);
    std::vector<double> var(X.cols, 0.0);
    for (std::size_t r = 0; r < X.rows; ++r)
        for (std::size_t c = 0; c < X.cols; ++c) {
            const double d = X.at(r, c) - mean[c];
            var[c] += d * d;
        }
    for (std::size_t c = 0; c < X.cols; ++c) {
        const double sd = std::sqrt(var[c] / static_cast<double>(X.rows));
        scale[c] = sd > 0.0 ? sd : 1.0;
    }
}

void Standardizer::apply(std::vector<double>& x) const {
    for (std::size_t c = 0; c < x.size(); ++c) x[c] = (x[c] - mean[c]) / scale[c];
}

namespace {

void check_dim(std::size_t expected, std::size_t got) {
    if (expected != got)
        throw DimensionMismatch("feature vector length " + std::to_string(got) +
                                ", model expects " + std::to_string(expected));
}

DataMatrix standardized_copy(const DataMatrix& X, const Standardizer& s) {
    DataMatrix out = X;
    for (std::size_t r = 0; r < out.rows; ++r)
        for (std::size_t c = 0; c < out.cols; ++c)
            out.at(r, c) = (out.at(r, c) - s.mean[c]) / s.scale[c];
    return out;
}

void require_multiclass(const std::vector<int>& y) {
    std::array<int, kNumClasses> counts{};
    for (int label : y) counts[static_cast<std::size_t>(label)] += 1;
    int present = 0;
    for (int c : counts) present += c > 0;
    if (present < 2) throw DegenerateLabels("training set has fewer than two classes");
}

} // namespace

std::vector<double> SoftmaxRegressor::predict_proba(const std::vector<double>& x) const {
    check_dim(n_features, x.size());
    std::vector<double> xs = x;
    scaler.apply(xs);
    std::vector<double> z(kNumClasses, 0.0);
    for (int k = 0; k < kNumClasses; ++k) {
        double acc = b[static_cast<std::size_t>(k)];
        const double* wk = W.data() + static_cast<std::size_t>(k) * n_features;
        for (std::size_t c = 0; c < n_features; ++c) acc += wk[c] * xs[c];
        z[static_cast<std::size_t>(k)] = acc;
    }
    return softmax(z);
}

double lr_loss_grad(const DataMatrix& X, const std::vector<int>& y,
                    const ClassWeights& weights, double C,
                    const std::vector<double>& theta, std::vector<double>* grad) {
    const std::size_t M = X.cols;
    const std::size_t N = X.rows;
    const double* W = theta.data();
    const double* b = theta.data() + kNumClasses * M;
    if (grad) grad->assign(theta.size(), 0.0);
    double loss = 0.0;
    std::vector<double> z(kNumClasses);
    for (std::size_t i = 0; i < N; ++i) {
        const double* xi = X.row(i);
        for (int k = 0; k < kNumClasses; ++k) {
            double acc = b[k];
            const double* wk = W + static_cast<std::size_t>(k) * M;
            for (std::size_t c = 0; c < M; ++c) acc += wk[c] * xi[c];
            z[static_cast<std::size_t>(k)] = acc;
        }
        auto p = softmax(z);
        const double wi = weights.of(y[i]);
        loss += cross_entropy(y[i], p, wi);
        if (grad) {
            for (int k = 0; k < kNumClasses; ++k) {
                const double dz =
                    wi * (p[static_cast<std::size_t>(k)] - (y[i] == k ? 1.0 : 0.0)) /
                    static_cast<double>(N);
                double* gk = grad->data() + static_cast<std::size_t>(k) * M;
                for (std::size_t c = 0; c < M; ++c) gk[c] += dz * xi[c];
                (*grad)[kNumClasses * M + static_cast<std::size_t>(k)] += dz;
            }
        }
    }
    loss /= static_cast<double>(N);
    // L2 penalty on weights only, strength 1/C
    const double lambda = 1.0 / (C * static_cast<double>(N));
    double reg = 0.0;
    for (std::size_t j = 0; j < kNumClasses * M; ++j) reg += W[j] * W[j];
    loss += 0.5 * lambda * reg;
    if (grad)
        for (std::size_t j = 0; j < kNumClasses * M; ++j) (*grad)[j] += lambda * W[j];
    return loss;
}

SoftmaxRegressor fit_lr(const LabeledData& train, const ClassWeights& weights,
                        std::uint64_t seed, const LrConfig& cfg) {
    (void)seed; // full-batch descent from zero init is deterministic
    require_multiclass(train.y);
    SoftmaxRegressor model;
    model.n_features = train.X.cols;
    model.scaler.fit(train.X);
    const DataMatrix Xs = standardized_copy(train.X, model.scaler);

    const std::size_t dim = kNumClasses * train.X.cols + kNumClasses;
    std::vector<double> theta(dim, 0.0), grad, trial;
    double loss = lr_loss_grad(Xs, train.y, weights, cfg.C, theta, &grad);
    double step = 1.0;
    for (int it = 0; it < cfg.max_iter; ++it) {
        double gnorm2 = 0.0;
        for (double g : grad) gnorm2 += g * g;
        if (std::sqrt(gnorm2) < cfg.tol) break;
        // backtracking line search (Armijo)
        step = std::min(step * 2.0, 1e4);
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt) {
            trial = theta;
            for (std::size_t j = 0; j < dim; ++j) trial[j] -= step * grad[j];
            const double trial_loss = lr_loss_grad(Xs, train.y, weights, cfg.C, trial, nullptr);
            if (trial_loss <= loss - 1e-4 * step * gnorm2) {
                theta = trial;
                loss = lr_loss_grad(Xs, train.y, weights, cfg.C, theta, &grad);
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    model.W.assign(theta.begin(), theta.begin() + static_cast<long>(kNumClasses * train.X.cols));
    model.b.assign(theta.begin() + static_cast<long>(kNumClasses * train.X.cols), theta.end());
    return model;
}

std::vector<double> MlpModel::predict_proba(const std::vector<double>& x) const {
    check_dim(n_features, x.size());
    std::vector<double> a = x;
    scaler.apply(a);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const MlpLayer& L = layers[l];
        std::vector<double> out(L.out, 0.0);
        for (std::size_t o = 0; o < L.out; ++o) {
            double acc = L.b[o];
            const double* w = L.W.data() + o * L.in;
            for (std::size_t i = 0; i < L.in; ++i) acc += w[i] * a[i];
            out[o] = acc;
        }
        if (l + 1 < layers.size())
            for (auto& v : out) v = std::max(0.0, v); // ReLU
        a = std::move(out);
    }
    return softmax(a);
}

double mlp_loss_grad(const std::vector<MlpLayer>& layers, const DataMatrix& X,
                     const std::vector<int>& y, const ClassWeights& weights,
                     std::vector<MlpLayer>* grad) {
    const std::size_t N = X.rows;
    if (grad) {
        grad->clear();
        for (const auto& L : layers) {
            MlpLayer g;
            g.in = L.in;
            g.out = L.out;
            g.W.assign(L.W.size(), 0.0);
            g.b.assign(L.b.size(), 0.0);
            grad->push_back(std::move(g));
        }
    }
    double loss = 0.0;
    const std::size_t depth = layers.size();
    std::vector<std::vector<double>> act(depth + 1); // pre-ReLU activations applied
    for (std::size_t s = 0; s < N; ++s) {
        act[0].assign(X.row(s), X.row(s) + X.cols);
        for (std::size_t l = 0; l < depth; ++l) {
            const MlpLayer& L = layers[l];
            act[l + 1].assign(L.out, 0.0);
            for (std::size_t o = 0; o < L.out; ++o) {
                double acc = L.b[o];
                const double* w = L.W.data() + o * L.in;
                const double* a = act[l].data();
                for (std::size_t i = 0; i < L.in; ++i) acc += w[i] * a[i];
                act[l + 1][o] = (l + 1 < depth) ? std::max(0.0, acc) : acc;
            }
        }
        auto p = softmax(act[depth]);
        const double wi = weights.of(y[s]);
        loss += cross_entropy(y[s], p, wi);
        if (!grad) continue;
        // delta at the output layer
        std::vector<double> delta(p.size());
        for (int k = 0; k < kNumClasses; ++k)
            delta[static_cast<std::size_t>(k)] =
                wi * (p[static_cast<std::size_t>(k)] - (y[s] == k ? 1.0 : 0.0)) /
                static_cast<double>(N);
        for (std::size_t l = depth; l-- > 0;) {
            MlpLayer& G = (*grad)[l];
            const MlpLayer& L = layers[l];
            for (std::size_t o = 0; o < L.out; ++o) {
                G.b[o] += delta[o];
                double* gw = G.W.data() + o * L.in;
                const double* a = act[l].data();
                for (std::size_t i = 0; i < L.in; ++i) gw[i] += delta[o] * a[i];
            }
            if (l == 0) break;
            std::vector<double> prev(L.in, 0.0);
            for (std::size_t o = 0; o < L.out; ++o) {
                const double* w = L.W.data() + o * L.in;
                const double d = delta[o];
                for (std::size_t i = 0; i < L.in; ++i) prev[i] += w[i] * d;
            }
            // ReLU derivative on the hidden activation
            for (std::size_t i = 0; i < L.in; ++i)
                if (act[l][i] <= 0.0) prev[i] = 0.0;
            delta = std::move(prev);
        }
    }
    return loss / static_cast<double>(N);
}

MlpModel fit_mlp(const LabeledData& train, const ClassWeights& weights,
                 std::uint64_t seed, const MlpConfig& cfg,
                 const LabeledData* validation) {
    require_multiclass(train.y);
    MlpModel model;
    model.n_features = train.X.cols;
    model.scaler.fit(train.X);
    const DataMatrix Xs = standardized_copy(train.X, model.scaler);

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> sizes{train.X.cols};
    for (int h : cfg.hidden) sizes.push_back(static_cast<std::size_t>(h));
    sizes.push_back(kNumClasses);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        MlpLayer L;
        L.in = sizes[l];
        L.out = sizes[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(L.in)); // He-style uniform
        std::uniform_real_distribution<double> dist(-bound, bound);
        L.W.resize(L.in * L.out);
        for (auto& w : L.W) w = dist(rng);
        L.b.assign(L.out, 0.0);
        model.layers.push_back(std::move(L));
    }

    const std::size_t N = Xs.rows;
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);

    double best_f1 = -1.0;
    int since_best = 0;
    std::vector<MlpLayer> best_layers = model.layers;

    std::vector<MlpLayer> grad;
    DataMatrix batch_x;
    std::vector<int> batch_y;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t off = 0; off < N; off += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t bs =
                std::min(static_cast<std::size_t>(cfg.batch_size), N - off);
            batch_x = DataMatrix(bs, Xs.cols);
            batch_y.assign(bs, 0);
            for (std::size_t i = 0; i < bs; ++i) {
                const std::size_t src = order[off + i];
                std::copy(Xs.row(src), Xs.row(src) + Xs.cols, batch_x.row(i));
                batch_y[i] = train.y[src];
            }
            mlp_loss_grad(model.layers, batch_x, batch_y, weights, &grad);
            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                MlpLayer& L = model.layers[l];
                const MlpLayer& G = grad[l];
                for (std::size_t j = 0; j < L.W.size(); ++j)
                    L.W[j] -= cfg.learning_rate * G.W[j];
                for (std::size_t j = 0; j < L.b.size(); ++j)
                    L.b[j] -= cfg.learning_rate * G.b[j];
            }
        }
        if (validation && validation->X.rows > 0) {
            std::vector<std::pair<int, int>> pairs;
            pairs.reserve(validation->X.rows);
            for (std::size_t i = 0; i < validation->X.rows; ++i) {
                std::vector<double> x(validation->X.row(i),
                                      validation->X.row(i) + validation->X.cols);
                pairs.emplace_back(validation->y[i], argmax_class(model.predict_proba(x)));
            }
            const double f1 = precision_recall_f1(confusion(pairs)).macro_f1;
            if (f1 > best_f1 + 1e-12) {
                best_f1 = f1;
                best_layers = model.layers;
                since_best = 0;
            } else if (++since_best >= cfg.patience) {
                model.layers = best_layers;
                break;
            }
        }
    }
    if (validation && validation->X.rows > 0 && best_f1 >= 0.0)
        model.layers = best_layers;
    return model;
}

} // namespace erl
