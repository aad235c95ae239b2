#include "mlbatch/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace mlbatch {

namespace {

constexpr double kProbClamp = 1e-7;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// x @ W^T + b, with W laid out out x in
Matrix affine(const Matrix& x, const Matrix& w, const std::vector<double>& b) {
    const std::size_t rows = x.rows(), out = w.rows(), in = w.cols();
    if (x.cols() != in) throw std::invalid_argument("affine: shape mismatch");
    Matrix y(rows, out);
    for (std::size_t i = 0; i < rows; ++i) {
        const double* xi = x.row_ptr(i);
        for (std::size_t o = 0; o < out; ++o) {
            const double* wo = w.row_ptr(o);
            double acc = b[o];
            for (std::size_t c = 0; c < in; ++c) acc += xi[c] * wo[c];
            y(i, o) = acc;
        }
    }
    return y;
}

struct ForwardTrace {
    std::vector<Matrix> activations;  // activations[0] = input, last = sigmoid output
    std::vector<Matrix> pre_acts;     // pre-activation of each layer
};

ForwardTrace forward_trace(const MLPModel& model, const Matrix& batch) {
    ForwardTrace tr;
    tr.activations.push_back(batch);
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        Matrix z = affine(tr.activations.back(), model.weights[l], model.biases[l]);
        Matrix a = z;
        const bool last = l + 1 == model.layer_count();
        for (double& v : a.data()) v = last ? sigmoid(v) : std::max(v, 0.0);
        tr.pre_acts.push_back(std::move(z));
        tr.activations.push_back(std::move(a));
    }
    return tr;
}

}  // namespace

MLPModel MLPModel::init(const std::vector<std::size_t>& layer_sizes, std::mt19937_64& rng) {
    if (layer_sizes.size() < 2) throw std::invalid_argument("need at least input and output layer");
    MLPModel m;
    m.layer_sizes = layer_sizes;
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const std::size_t in = layer_sizes[l], out = layer_sizes[l + 1];
        Matrix w(out, in);
        const double scale = std::sqrt(2.0 / static_cast<double>(in));
        for (double& v : w.data()) v = scale * gauss(rng);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(out, 0.0);
    }
    return m;
}

AdamState AdamState::init(const MLPModel& model, double learning_rate, double weight_decay) {
    AdamState s;
    s.learning_rate = learning_rate;
    s.weight_decay = weight_decay;
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        s.m_weights.emplace_back(model.weights[l].rows(), model.weights[l].cols());
        s.v_weights.emplace_back(model.weights[l].rows(), model.weights[l].cols());
        s.m_biases.emplace_back(model.biases[l].size(), 0.0);
        s.v_biases.emplace_back(model.biases[l].size(), 0.0);
    }
    return s;
}

Matrix forward(const MLPModel& model, const Matrix& batch) {
    if (batch.cols() != model.layer_sizes.front())
        throw std::invalid_argument("forward: batch width != input size");
    return forward_trace(model, batch).activations.back();
}

std::vector<double> bce_per_sample(const Matrix& probabilities, const Matrix& labels) {
    if (!probabilities.same_shape(labels))
        throw std::invalid_argument("bce_per_sample: shape mismatch");
    const std::size_t n = probabilities.rows(), q = probabilities.cols();
    std::vector<double> loss(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < q; ++j) {
            double p = std::clamp(probabilities(i, j), kProbClamp, 1.0 - kProbClamp);
            acc += labels(i, j) != 0.0 ? std::log(p) : std::log(1.0 - p);
        }
        loss[i] = -acc / static_cast<double>(q);
    }
    return loss;
}

Gradients backward(const MLPModel& model, const Matrix& batch, const Matrix& labels) {
    if (batch.cols() != model.layer_sizes.front())
        throw std::invalid_argument("backward: batch width != input size");
    ForwardTrace tr = forward_trace(model, batch);
    const std::size_t b = batch.rows();
    const std::size_t q = model.layer_sizes.back();
    const std::size_t layers = model.layer_count();

    Gradients g;
    g.weights.resize(layers);
    g.biases.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        g.weights[l] = Matrix(model.weights[l].rows(), model.weights[l].cols());
        g.biases[l].assign(model.biases[l].size(), 0.0);
    }

    // dL/dz at the output: sigmoid + BCE collapse to (p - y) / (q * b)
    Matrix delta(b, q);
    const Matrix& p = tr.activations.back();
    const double norm = 1.0 / (static_cast<double>(q) * static_cast<double>(b));
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < q; ++j)
            delta(i, j) = (p(i, j) - labels(i, j)) * norm;

    for (std::size_t l = layers; l-- > 0;) {
        const Matrix& a_prev = tr.activations[l];
        Matrix& gw = g.weights[l];
        std::vector<double>& gb = g.biases[l];
        const std::size_t out = gw.rows(), in = gw.cols();
        for (std::size_t i = 0; i < b; ++i) {
            const double* di = delta.row_ptr(i);
            const double* ai = a_prev.row_ptr(i);
            for (std::size_t o = 0; o < out; ++o) {
                double d = di[o];
                gb[o] += d;
                double* gwo = gw.row_ptr(o);
                for (std::size_t c = 0; c < in; ++c) gwo[c] += d * ai[c];
            }
        }
        if (l == 0) break;
        // propagate through W^T and the ReLU mask of the previous layer
        Matrix next(b, in);
        const Matrix& z_prev = tr.pre_acts[l - 1];
        for (std::size_t i = 0; i < b; ++i) {
            const double* di = delta.row_ptr(i);
            double* ni = next.row_ptr(i);
            for (std::size_t c = 0; c < in; ++c) ni[c] = 0.0;
            for (std::size_t o = 0; o < out; ++o) {
                const double* wo = model.weights[l].row_ptr(o);
                double d = di[o];
                for (std::size_t c = 0; c < in; ++c) ni[c] += d * wo[c];
            }
            for (std::size_t c = 0; c < in; ++c)
                if (z_prev(i, c) <= 0.0) ni[c] = 0.0;
        }
        delta = std::move(next);
    }
    return g;
}

namespace {

void adam_update(double& param, double g, double& m, double& v, const AdamState& s,
                 double bc1, double bc2) {
    g += s.weight_decay * param;
    m = s.beta1 * m + (1.0 - s.beta1) * g;
    v = s.beta2 * v + (1.0 - s.beta2) * g * g;
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    param -= s.learning_rate * m_hat / (std::sqrt(v_hat) + s.epsilon);
}

}  // namespace

void adam_step(AdamState& state, MLPModel& model, const Gradients& grads) {
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        auto& w = model.weights[l].data();
        const auto& gw = grads.weights[l].data();
        auto& mw = state.m_weights[l].data();
        auto& vw = state.v_weights[l].data();
        for (std::size_t i = 0; i < w.size(); ++i)
            adam_update(w[i], gw[i], mw[i], vw[i], state, bc1, bc2);
        auto& b = model.biases[l];
        const auto& gb = grads.biases[l];
        auto& mb = state.m_biases[l];
        auto& vb = state.v_biases[l];
        for (std::size_t i = 0; i < b.size(); ++i)
            adam_update(b[i], gb[i], mb[i], vb[i], state, bc1, bc2);
    }
}

void save_checkpoint(const MLPModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    out.precision(17);
    out << "mlbatch-mlp 1\n" << model.layer_sizes.size();
    for (std::size_t s : model.layer_sizes) out << " " << s;
    out << "\n";
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        for (double v : model.weights[l].data()) out << v << "\n";
        for (double v : model.biases[l]) out << v << "\n";
    }
}

MLPModel load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string magic;
    int version;
    in >> magic >> version;
    if (magic != "mlbatch-mlp" || version != 1)
        throw std::runtime_error("unrecognized checkpoint header in " + path);
    std::size_t count;
    in >> count;
    std::vector<std::size_t> sizes(count);
    for (auto& s : sizes) in >> s;
    std::mt19937_64 dummy(0);
    MLPModel m = MLPModel::init(sizes, dummy);
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
        for (double& v : m.weights[l].data()) in >> v;
        for (double& v : m.biases[l]) in >> v;
    }
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    return m;
}

}  // namespace mlbatch
