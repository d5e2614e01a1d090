// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The scenid Authors

#include "scenid/classifier.hpp"

#include <cmath>
#include <fstream>
#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "scenid/error.hpp"
#include "scenid/io.hpp"
#include "scenid/rng.hpp"

namespace scenid {

void MLPParams::validate() const {
    require(layer_sizes.size() >= 2, ErrorKind::InvalidArgument, "network needs at least two layers");
    require(weights.size() == layer_sizes.size() - 1 && biases.size() == weights.size(), ErrorKind::Dimension,
            "parameter count does not match the layer list");
    for (std::size_t h = 0; h < weights.size(); ++h) {
        require(weights[h].rows() == layer_sizes[h + 1] && weights[h].cols() == layer_sizes[h] &&
                    biases[h].size() == layer_sizes[h + 1],
                ErrorKind::Dimension, "layer " + std::to_string(h) + " has inconsistent shapes");
        require(weights[h].allFinite() && biases[h].allFinite(), ErrorKind::DegenerateInput,
                "layer " + std::to_string(h) + " has non-finite parameters");
    }
}

void TrainConfig::validate() const {
    require(learning_rate >= 0.0, ErrorKind::InvalidArgument, "learning_rate must be >= 0");
    require(momentum >= 0.0 && momentum < 1.0, ErrorKind::InvalidArgument, "momentum must lie in [0, 1)");
    require(epochs >= 1, ErrorKind::InvalidArgument, "epochs must be >= 1");
    require(batch_size >= 1, ErrorKind::InvalidArgument, "batch_size must be >= 1");
    require(plateau_patience >= 0, ErrorKind::InvalidArgument, "plateau_patience must be >= 0");
}

std::uint64_t TrainConfig::fingerprint() const {
    std::ostringstream os;
    os << io::format_double(learning_rate) << ' ' << io::format_double(momentum) << ' ' << epochs << ' '
       << batch_size << ' ' << seed << ' ' << plateau_patience << ' ' << io::format_double(plateau_tol);
    const std::string s = os.str();
    return fnv1a64(s.data(), s.size());
}

MLPParams init_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed) {
    require(layer_sizes.size() >= 2, ErrorKind::InvalidArgument, "network needs at least two layers");
    for (int s : layer_sizes) require(s >= 1, ErrorKind::InvalidArgument, "layer sizes must be positive");
    MLPParams p;
    p.layer_sizes = layer_sizes;
    std::mt19937_64 gen(seed);
    for (std::size_t h = 0; h + 1 < layer_sizes.size(); ++h) {
        const int fan_in = layer_sizes[h], fan_out = layer_sizes[h + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> uni(-limit, limit);
        Eigen::MatrixXd w(fan_out, fan_in);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = uni(gen);
        p.weights.push_back(std::move(w));
        p.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return p;
}

Eigen::MatrixXd forward_batch(const MLPParams& params, const Eigen::MatrixXd& inputs) {
    require(inputs.rows() == params.input_size(), ErrorKind::Dimension,
            "input has " + std::to_string(inputs.rows()) + " features, network expects " +
                std::to_string(params.input_size()));
    Eigen::MatrixXd a = inputs;
    for (std::size_t h = 0; h < params.layer_count(); ++h)
        a = ((params.weights[h] * a).colwise() + params.biases[h]).array().tanh().matrix();
    return a;
}

Eigen::VectorXd forward(const MLPParams& params, const Eigen::VectorXd& input) {
    return forward_batch(params, input);
}

Eigen::VectorXd forward(const MLPParams& params, const std::vector<double>& input) {
    return forward(params, Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size())));
}

Eigen::MatrixXd one_hot_targets(const std::vector<int>& labels, int classes) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(classes, static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        require(labels[i] >= 1 && labels[i] <= classes, ErrorKind::InvalidArgument,
                "label " + std::to_string(labels[i]) + " outside 1.." + std::to_string(classes));
        t(labels[i] - 1, static_cast<Eigen::Index>(i)) = 1.0;
    }
    return t;
}

double batch_loss(const MLPParams& params, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
    Eigen::MatrixXd y = forward_batch(params, inputs);
    require(targets.rows() == y.rows() && targets.cols() == y.cols(), ErrorKind::Dimension,
            "target shape does not match the network output");
    return (y - targets).squaredNorm() / static_cast<double>(y.rows() * y.cols());
}

Gradients gradients(const MLPParams& params, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
    require(inputs.cols() >= 1, ErrorKind::InvalidArgument, "empty batch");
    require(targets.rows() == params.output_size() && targets.cols() == inputs.cols(), ErrorKind::Dimension,
            "target shape does not match the network output");
    const std::size_t layers = params.layer_count();
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(layers + 1);
    acts.push_back(inputs);
    require(inputs.rows() == params.input_size(), ErrorKind::Dimension,
            "input has " + std::to_string(inputs.rows()) + " features, network expects " +
                std::to_string(params.input_size()));
    for (std::size_t h = 0; h < layers; ++h)
        acts.push_back(((params.weights[h] * acts.back()).colwise() + params.biases[h]).array().tanh().matrix());

    Gradients g;
    g.weights.resize(layers);
    g.biases.resize(layers);
    const double scale = 2.0 / static_cast<double>(targets.rows() * targets.cols());
    Eigen::MatrixXd upstream = scale * (acts.back() - targets);
    for (std::size_t h = layers; h-- > 0;) {
        Eigen::MatrixXd delta = upstream.array() * (1.0 - acts[h + 1].array().square());
        g.weights[h] = delta * acts[h].transpose();
        g.biases[h] = delta.rowwise().sum();
        if (h > 0) upstream = params.weights[h].transpose() * delta;
    }
    return g;
}

namespace {

Eigen::MatrixXd gather(const Eigen::MatrixXd& src, const std::vector<std::size_t>& idx, std::size_t from,
                       std::size_t to) {
    Eigen::MatrixXd out(src.rows(), static_cast<Eigen::Index>(to - from));
    for (std::size_t i = from; i < to; ++i) out.col(static_cast<Eigen::Index>(i - from)) = src.col(static_cast<Eigen::Index>(idx[i]));
    return out;
}

} // namespace

std::pair<MLPParams, TrainReport> train(MLPParams params, const LabeledSet& data, const TrainConfig& config) {
    config.validate();
    params.validate();
    require(data.size() >= 1, ErrorKind::InvalidArgument, "empty training set");
    require(data.inputs.cols() == static_cast<Eigen::Index>(data.size()), ErrorKind::Dimension,
            "training inputs and labels differ in count");
    require(data.inputs.rows() == params.input_size(), ErrorKind::Dimension,
            "training features have " + std::to_string(data.inputs.rows()) + " values, network expects " +
                std::to_string(params.input_size()));
    const Eigen::MatrixXd targets = one_hot_targets(data.labels, params.output_size());

    std::vector<Eigen::MatrixXd> vel_w;
    std::vector<Eigen::VectorXd> vel_b;
    for (std::size_t h = 0; h < params.layer_count(); ++h) {
        vel_w.push_back(Eigen::MatrixXd::Zero(params.weights[h].rows(), params.weights[h].cols()));
        vel_b.push_back(Eigen::VectorXd::Zero(params.biases[h].size()));
    }

    std::mt19937_64 gen(config.seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto batch = static_cast<std::size_t>(config.batch_size);

    TrainReport report;
    double best = std::numeric_limits<double>::infinity();
    int since_best = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), gen);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t stop = std::min(order.size(), start + batch);
            Eigen::MatrixXd x = gather(data.inputs, order, start, stop);
            Eigen::MatrixXd t = gather(targets, order, start, stop);
            loss_sum += batch_loss(params, x, t) * static_cast<double>(stop - start);
            Gradients g = gradients(params, x, t);
            for (std::size_t h = 0; h < params.layer_count(); ++h) {
                vel_w[h] = config.momentum * vel_w[h] - config.learning_rate * g.weights[h];
                vel_b[h] = config.momentum * vel_b[h] - config.learning_rate * g.biases[h];
                params.weights[h] += vel_w[h];
                params.biases[h] += vel_b[h];
            }
        }
        const double loss = loss_sum / static_cast<double>(order.size());
        report.epoch_loss.push_back(loss);
        if (loss < best * (1.0 - config.plateau_tol)) {
            best = loss;
            since_best = 0;
        } else if (config.plateau_patience > 0 && ++since_best >= config.plateau_patience) {
            break;
        }
    }
    params.train_fingerprint = config.fingerprint();
    report.train_accuracy = accuracy(params, data);
    return {std::move(params), std::move(report)};
}

int classify_output(const Eigen::VectorXd& output) {
    require(output.size() >= 1, ErrorKind::Dimension, "empty network output");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < output.size(); ++i)
        if (output[i] > output[best]) best = i;
    return static_cast<int>(best) + 1;
}

int classify(const MLPParams& params, const std::vector<double>& feature) {
    return classify_output(forward(params, feature));
}

double accuracy(const MLPParams& params, const LabeledSet& data) {
    if (data.size() == 0) return 0.0;
    Eigen::MatrixXd y = forward_batch(params, data.inputs);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (classify_output(y.col(static_cast<Eigen::Index>(i))) == data.labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

std::uint64_t complexity_count(const std::vector<int>& hidden, int outputs, std::uint64_t n_training) {
    require(!hidden.empty(), ErrorKind::InvalidArgument, "complexity needs at least one hidden layer");
    require(n_training >= 1, ErrorKind::InvalidArgument, "training count must be >= 1");
    const std::uint64_t m2 = 2 * n_training;
    std::uint64_t total = 0;
    for (std::size_t h = 0; h + 1 < hidden.size(); ++h)
        total += m2 * static_cast<std::uint64_t>(hidden[h]) * static_cast<std::uint64_t>(hidden[h + 1]);
    total += m2 * static_cast<std::uint64_t>(hidden.back()) * static_cast<std::uint64_t>(outputs);
    total += m2 * static_cast<std::uint64_t>(outputs);
    return total;
}

std::uint64_t complexity_count(const MLPParams& params, std::uint64_t n_training) {
    params.validate();
    std::vector<int> hidden(params.layer_sizes.begin() + 1, params.layer_sizes.end() - 1);
    return complexity_count(hidden, params.output_size(), n_training);
}

// ------------------------------------------------------------- model file

void write_model(std::ostream& out, const MLPParams& params) {
    params.validate();
    out << "scenid-mlp 1\n";
    out << "activation tanh\n";
    out << "train_fingerprint " << io::hex64(params.train_fingerprint) << "\n";
    out << "layers";
    for (int s : params.layer_sizes) out << ' ' << s;
    out << "\n";
    for (std::size_t h = 0; h < params.layer_count(); ++h) {
        const auto& w = params.weights[h];
        out << "weights " << h << ' ' << w.rows() << ' ' << w.cols() << "\n";
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) out << (c ? " " : "") << io::format_double(w(r, c));
            out << "\n";
        }
        out << "biases " << h << ' ' << params.biases[h].size() << "\n";
        for (Eigen::Index r = 0; r < params.biases[h].size(); ++r)
            out << (r ? " " : "") << io::format_double(params.biases[h][r]);
        out << "\n";
    }
}

MLPParams read_model(std::istream& in) {
    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != "scenid-mlp" || version != 1)
        fail(ErrorKind::Parse, "model file: expected 'scenid-mlp 1' header");
    std::string activation;
    if (!(in >> word >> activation) || word != "activation" || activation != "tanh")
        fail(ErrorKind::Parse, "model file: only tanh activation is supported");
    std::string fp;
    if (!(in >> word >> fp) || word != "train_fingerprint")
        fail(ErrorKind::Parse, "model file: missing train_fingerprint");

    MLPParams p;
    p.train_fingerprint = std::stoull(fp, nullptr, 16);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::istringstream ls(line);
    ls >> word;
    if (word != "layers") fail(ErrorKind::Parse, "model file: missing layers line");
    for (int s; ls >> s;) p.layer_sizes.push_back(s);
    if (p.layer_sizes.size() < 2) fail(ErrorKind::Parse, "model file: need at least two layers");

    auto read_number = [&](const char* what) {
        std::string tok;
        if (!(in >> tok)) fail(ErrorKind::Parse, std::string("model file: truncated ") + what);
        return io::parse_double(tok, std::string("model file ") + what);
    };
    for (std::size_t h = 0; h + 1 < p.layer_sizes.size(); ++h) {
        std::size_t idx = 0;
        Eigen::Index rows = 0, cols = 0;
        if (!(in >> word >> idx >> rows >> cols) || word != "weights" || idx != h || rows != p.layer_sizes[h + 1] ||
            cols != p.layer_sizes[h])
            fail(ErrorKind::Parse, "model file: bad weights header for layer " + std::to_string(h));
        Eigen::MatrixXd w(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = read_number("weights");
        if (!(in >> word >> idx >> rows) || word != "biases" || idx != h || rows != p.layer_sizes[h + 1])
            fail(ErrorKind::Parse, "model file: bad biases header for layer " + std::to_string(h));
        Eigen::VectorXd b(rows);
        for (Eigen::Index r = 0; r < rows; ++r) b[r] = read_number("biases");
        p.weights.push_back(std::move(w));
        p.biases.push_back(std::move(b));
    }
    p.validate();
    return p;
}

void save_model(const std::string& path, const MLPParams& params) {
    std::ostringstream os;
    write_model(os, params);
    io::write_file(path, os.str());
}

MLPParams load_model(const std::string& path) {
    std::istringstream in(io::read_file(path));
    return read_model(in);
}

} // namespace scenid
