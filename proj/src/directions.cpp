#include "faceforge/directions.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "faceforge/common.hpp"
#include "faceforge/parallel.hpp"
#include "faceforge/rng.hpp"

namespace faceforge {

const std::vector<std::string> kRecipeAttributes = {
    "happy", "angry", "surprise", "sad", "eye_openness", "age", "yaw", "pitch"};

namespace {

class ToyAnnotator final : public Annotator {
public:
    std::string name() const override { return "toy"; }

    std::vector<std::string> attributes() const override {
        return ToyGenerator::attribute_names();
    }

    std::optional<double> score(const Image& image, const std::string& attribute) const override {
        auto params = ToyGenerator::decode_strip(image);
        if (!params)
            return std::nullopt;
        int idx;
        try {
            idx = ToyGenerator::attribute_index(attribute);
        } catch (const Error&) {
            return std::nullopt;
        }
        return params->attrs[std::size_t(idx)];
    }
};

Eigen::VectorXd row_average(const LatentW& w) {
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(kLatentDim);
    for (int r = 0; r < kLatentRows; ++r)
        for (int i = 0; i < kLatentDim; ++i)
            avg[i] += w.row(r)[i];
    return avg / double(kLatentRows);
}

double accuracy(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                const Eigen::VectorXd& beta, double bias) {
    if (x.rows() == 0)
        return 0.0;
    Eigen::ArrayXd p = ((x * beta).array() + bias);
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        if ((p[i] >= 0.0) == (y[i] > 0.5))
            ++correct;
    return double(correct) / double(x.rows());
}

} // namespace

std::unique_ptr<Annotator> make_toy_annotator() { return std::make_unique<ToyAnnotator>(); }

std::unique_ptr<Annotator> make_annotator(const std::string& name) {
    if (name == "toy")
        return make_toy_annotator();
    throw Error(ErrorKind::Load, "unknown annotator: " + name);
}

HarvestResult harvest(const GeneratorBackend& backend, const Annotator& annotator,
                      const std::string& attribute, std::size_t n, std::uint64_t seed,
                      double threshold) {
    require(n >= 2, ErrorKind::Shape, "harvest needs n >= 2");

    // each sample owns a seed-derived substream, so workers can render in
    // any order and the labeled set stays identical; stochastic annotators
    // run sequentially
    std::vector<std::optional<LabeledLatent>> slots(n);
    auto one = [&](std::size_t i) {
        std::uint64_t sample_seed = seed_mix({seed, fnv1a64("harvest"), i});
        LatentW w = backend.map_z_to_w(sample_z(sample_seed));
        RenderedImage img = backend.synthesize(w);
        auto score = annotator.score(img.pixels, attribute);
        if (!score)
            return; // skipped
        LabeledLatent s;
        s.w = std::move(w);
        s.confidence = *score;
        s.label = *score >= threshold ? 1 : 0;
        slots[i] = std::move(s);
    };
    if (annotator.deterministic())
        parallel_for(n, one);
    else
        for (std::size_t i = 0; i < n; ++i)
            one(i);

    HarvestResult result;
    result.samples.reserve(n);
    for (auto& slot : slots) {
        if (slot)
            result.samples.push_back(std::move(*slot));
        else
            ++result.skipped;
    }
    bool has0 = false, has1 = false;
    for (const auto& s : result.samples)
        (s.label ? has1 : has0) = true;
    require(has0 && has1, ErrorKind::Numeric,
            "harvest for '" + attribute + "' produced a single class");
    return result;
}

FitReport fit_direction(const std::vector<LabeledLatent>& samples, const std::string& attribute,
                        const LogRegConfig& cfg, LayerRange layers) {
    require(samples.size() >= 2, ErrorKind::Shape, "fit_direction needs >= 2 samples");
    bool has0 = false, has1 = false;
    for (const auto& s : samples)
        (s.label ? has1 : has0) = true;
    require(has0 && has1, ErrorKind::Numeric,
            "fit_direction for '" + attribute + "': both classes must be present");

    Eigen::Index n = Eigen::Index(samples.size());
    Eigen::MatrixXd x(n, kLatentDim);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x.row(i) = row_average(samples[std::size_t(i)].w).transpose();
        y[i] = samples[std::size_t(i)].label;
    }

    // deterministic 80/20 split; tail is the holdout
    Eigen::Index n_train = std::max<Eigen::Index>(2, n * 8 / 10);
    if (n_train == n && n > 2)
        n_train = n - 1;
    Eigen::MatrixXd xt = x.topRows(n_train);
    Eigen::VectorXd yt = y.head(n_train);

    // IRLS on mean log-loss + l2 * ||beta||^2
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(kLatentDim);
    double bias = 0.0;
    bool converged = false;
    int iters_used = 0;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        ++iters_used;
        Eigen::ArrayXd z = (xt * beta).array() + bias;
        Eigen::ArrayXd p = 1.0 / (1.0 + (-z).exp());
        Eigen::ArrayXd wgt = (p * (1.0 - p)).max(1e-10);

        Eigen::VectorXd grad = xt.transpose() * (p - yt.array()).matrix() / double(n_train) +
                               2.0 * cfg.l2 * beta;
        double grad_bias = (p - yt.array()).sum() / double(n_train);

        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(kLatentDim + 1, kLatentDim + 1);
        h.topLeftCorner(kLatentDim, kLatentDim) =
            xt.transpose() * wgt.matrix().asDiagonal() * xt / double(n_train) +
            2.0 * cfg.l2 * Eigen::MatrixXd::Identity(kLatentDim, kLatentDim);
        h.topRightCorner(kLatentDim, 1) = xt.transpose() * wgt.matrix() / double(n_train);
        h.bottomLeftCorner(1, kLatentDim) = h.topRightCorner(kLatentDim, 1).transpose();
        h(kLatentDim, kLatentDim) = wgt.sum() / double(n_train) + 1e-10;

        Eigen::VectorXd g(kLatentDim + 1);
        g.head(kLatentDim) = grad;
        g[kLatentDim] = grad_bias;
        Eigen::VectorXd step = h.ldlt().solve(g);

        beta -= step.head(kLatentDim);
        bias -= step[kLatentDim];
        if (step.norm() < cfg.tol) {
            converged = true;
            break;
        }
    }

    double norm = beta.norm();
    require(norm > 0.0, ErrorKind::Numeric,
            "fit_direction for '" + attribute + "': degenerate zero weight vector");
    Eigen::VectorXd unit = beta / norm;
    // renormalize exactly against accumulated rounding
    unit /= unit.norm();

    FitReport report;
    report.sample_count = samples.size();
    report.converged = converged;
    report.train_accuracy = accuracy(xt, yt, beta, bias);
    if (n_train < n)
        report.holdout_accuracy =
            accuracy(x.bottomRows(n - n_train), y.tail(n - n_train), beta, bias);
    else
        report.holdout_accuracy = report.train_accuracy;
    report.direction = SemanticDirection(
        attribute, std::vector<double>(unit.data(), unit.data() + kLatentDim), layers,
        report.holdout_accuracy);
    return report;
}

LayerRange default_layer_range(const std::string& attribute) {
    if (attribute == "yaw" || attribute == "pitch")
        return LayerRange(0, 8);
    if (attribute == "hue" || attribute == "brightness")
        return LayerRange(8, 18);
    return LayerRange(0, 18);
}

RecipeResult recipe_directions(const GeneratorBackend& backend, const Annotator& annotator,
                               std::size_t samples_per_attribute, std::uint64_t seed,
                               const LogRegConfig& cfg) {
    RecipeResult result;
    for (const std::string& attr : kRecipeAttributes) {
        try {
            std::uint64_t attr_seed = seed_mix({seed, fnv1a64(attr)});
            HarvestResult h = harvest(backend, annotator, attr, samples_per_attribute, attr_seed);
            FitReport report = fit_direction(h.samples, attr, cfg, default_layer_range(attr));
            result.directions.emplace(attr, report.direction);
            result.reports.emplace(attr, std::move(report));
        } catch (const Error& e) {
            result.errors.push_back(attr + ": " + e.what());
        }
    }
    return result;
}

std::map<std::string, SemanticDirection> toy_reference_directions(const ToyGenerator& toy) {
    std::map<std::string, SemanticDirection> dirs;
    for (const std::string& attr : kRecipeAttributes)
        dirs.emplace(attr,
                     SemanticDirection(attr, toy.direction(attr), default_layer_range(attr)));
    return dirs;
}

} // namespace faceforge
