#include "faceforge/validation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "faceforge/common.hpp"
#include "faceforge/parallel.hpp"
#include "faceforge/sha256.hpp"

namespace faceforge {

namespace {

double dist(const LandmarkSet& lm, int i, int j) {
    double dx = lm.x(i) - lm.x(j), dy = lm.y(i) - lm.y(j);
    return std::sqrt(dx * dx + dy * dy);
}

double one_eye_ear(const LandmarkSet& lm, int base) {
    double span = dist(lm, base + 0, base + 3);
    require(span >= 1e-9, ErrorKind::Numeric, "ear: degenerate horizontal eye span");
    return (dist(lm, base + 1, base + 5) + dist(lm, base + 2, base + 4)) / (2.0 * span);
}

} // namespace

EarReading ear(const LandmarkSet& landmarks) {
    EarReading r;
    r.left = one_eye_ear(landmarks, 36);
    r.right = one_eye_ear(landmarks, 42);
    r.mean = (r.left + r.right) / 2.0;
    return r;
}

BlinkReport blink_sweep_check(const GeneratorBackend& backend, const LatentW& subject,
                              const SemanticDirection& eye_direction, int frames,
                              double coeff_start, double coeff_end) {
    EditSpec spec{eye_direction, coeff_start, coeff_end, frames};
    BlinkReport report;
    report.coefficients = edit_coefficients(spec);
    for (double c : report.coefficients) {
        LatentW frame = apply_direction(subject, eye_direction, c);
        report.ear_values.push_back(ear(backend.landmarks(frame)).mean);
    }
    report.initial = report.ear_values.front();
    report.final = report.ear_values.back();
    report.no_op = coeff_start == coeff_end;
    report.strictly_decreasing = true;
    for (std::size_t i = 1; i < report.ear_values.size(); ++i) {
        if (!(report.ear_values[i] < report.ear_values[i - 1])) {
            report.strictly_decreasing = false;
            report.violations.push_back(int(i));
        }
    }
    return report;
}

LandmarkProvider toy_landmark_provider() {
    return [](const Image& img) -> std::optional<LandmarkSet> {
        if (img.width != img.height || img.width < 64)
            return std::nullopt;
        auto params = ToyGenerator::decode_strip(img);
        if (!params)
            return std::nullopt;
        return shared_toy(img.width).landmarks_params(*params);
    };
}

LandmarkCheckReport landmark_check(const std::vector<Image>& images,
                                   const LandmarkProvider& detector,
                                   const std::vector<std::string>& ids) {
    LandmarkCheckReport report;
    report.items.resize(images.size());
    parallel_for(images.size(), [&](std::size_t i) {
        LandmarkCheckItem& item = report.items[i];
        item.id = i < ids.size() ? ids[i] : "image-" + std::to_string(i);
        try {
            auto lm = detector(images[i]);
            if (lm) {
                item.detected = true;
                item.in_bounds = true;
                for (const auto& p : lm->points) {
                    if (p[0] < 0.0 || p[1] < 0.0 || p[0] > images[i].width ||
                        p[1] > images[i].height)
                        item.in_bounds = false;
                }
            }
        } catch (const std::exception& e) {
            item.error = e.what(); // detector crash isolated per image
        }
    });
    for (const auto& item : report.items)
        if (item.detected)
            ++report.detected_count;
    report.detection_rate =
        images.empty() ? 0.0 : double(report.detected_count) / double(images.size());
    return report;
}

UniquenessReport uniqueness_report(const Embedder& embedder,
                                   const std::vector<std::vector<Image>>& subjects) {
    require(subjects.size() >= 2, ErrorKind::Shape, "uniqueness_report needs >= 2 subjects");
    for (const auto& group : subjects)
        require(!group.empty(), ErrorKind::Shape, "uniqueness_report: empty subject group");

    std::vector<std::vector<Eigen::VectorXd>> emb(subjects.size());
    for (std::size_t s = 0; s < subjects.size(); ++s)
        for (const Image& img : subjects[s])
            emb[s].push_back(embedder.embed(img));

    auto cosine = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        double na = a.norm(), nb = b.norm();
        return (na > 0.0 && nb > 0.0) ? a.dot(b) / (na * nb) : 0.0;
    };

    UniquenessReport report;
    std::size_t max_variants = 0;
    for (const auto& g : emb)
        max_variants = std::max(max_variants, g.size() - 1);
    report.intra_scores =
        Eigen::MatrixXd::Constant(Eigen::Index(subjects.size()),
                                  Eigen::Index(std::max<std::size_t>(1, max_variants)), 1.0);

    double min_intra = 1.0;
    bool any_variant = false;
    for (std::size_t s = 0; s < emb.size(); ++s) {
        for (std::size_t v = 1; v < emb[s].size(); ++v) {
            double c = cosine(emb[s][0], emb[s][v]);
            report.intra_scores(Eigen::Index(s), Eigen::Index(v - 1)) = c;
            min_intra = std::min(min_intra, c);
            any_variant = true;
        }
    }

    report.inter_scores = Eigen::MatrixXd::Zero(Eigen::Index(emb.size()), Eigen::Index(emb.size()));
    double max_inter = -1.0;
    for (std::size_t i = 0; i < emb.size(); ++i) {
        for (std::size_t j = 0; j < emb.size(); ++j) {
            double c = i == j ? 1.0 : cosine(emb[i][0], emb[j][0]);
            report.inter_scores(Eigen::Index(i), Eigen::Index(j)) = c;
            if (i != j)
                max_inter = std::max(max_inter, c);
        }
    }

    report.min_intra = any_variant ? min_intra : 1.0;
    report.max_inter = max_inter;
    report.margin = report.min_intra - report.max_inter;
    report.degenerate = !any_variant || max_inter > 1.0 - 1e-9;
    report.inconclusive = report.margin < 0.1 && !report.degenerate;
    return report;
}

namespace {

// Logistic regression over a grayscale thumbnail plus the first two image
// rows at native resolution, trained by damped Newton (IRLS). The native
// rows keep fine-grained cues a coarse thumbnail would average away.
class LinearProbe final : public BinaryClassifier {
public:
    LinearProbe(int thumb, int epochs, double lr, double l2)
        : thumb_(thumb), epochs_(epochs), lr_(lr), l2_(l2) {}

    std::string name() const override { return "linear-probe"; }

    void train(const std::vector<Image>& images, const std::vector<int>& labels,
               std::uint64_t) override {
        require(images.size() == labels.size() && !images.empty(), ErrorKind::Shape,
                "linear probe: images/labels mismatch");
        native_cols_ = images.front().width;
        Eigen::Index n = Eigen::Index(images.size());
        Eigen::Index d = dim();
        Eigen::MatrixXd x(n, d);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            x.row(i) = features(images[std::size_t(i)]).transpose();
            y[i] = labels[std::size_t(i)];
        }

        beta_ = Eigen::VectorXd::Zero(d);
        bias_ = 0.0;
        loss_curve_.clear();
        accuracy_curve_.clear();
        double damping = 1.0;
        auto eval = [&](const Eigen::VectorXd& beta, double bias, Eigen::ArrayXd& p) {
            Eigen::ArrayXd z = (x * beta).array() + bias;
            p = 1.0 / (1.0 + (-z).exp());
            return -((y.array() * (p + 1e-12).log()) +
                     (1.0 - y.array()) * (1.0 - p + 1e-12).log())
                        .mean() +
                   l2_ * beta.squaredNorm();
        };
        Eigen::ArrayXd p;
        double loss = eval(beta_, bias_, p);
        for (int epoch = 0; epoch < epochs_; ++epoch) {
            loss_curve_.push_back(loss);
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                acc += (p[i] >= 0.5) == (y[i] > 0.5) ? 1.0 : 0.0;
            accuracy_curve_.push_back(acc / double(n));

            Eigen::ArrayXd wgt = (p * (1.0 - p)).max(1e-10);
            Eigen::VectorXd grad =
                x.transpose() * (p - y.array()).matrix() / double(n) + 2.0 * l2_ * beta_;
            double gb = (p - y.array()).mean();

            Eigen::MatrixXd h(d + 1, d + 1);
            h.topLeftCorner(d, d) =
                x.transpose() * wgt.matrix().asDiagonal() * x / double(n) +
                2.0 * l2_ * Eigen::MatrixXd::Identity(d, d);
            h.topRightCorner(d, 1) = x.transpose() * wgt.matrix() / double(n);
            h.bottomLeftCorner(1, d) = h.topRightCorner(d, 1).transpose();
            h(d, d) = wgt.mean() + 1e-10;

            Eigen::VectorXd g(d + 1);
            g.head(d) = grad;
            g[d] = gb;
            Eigen::VectorXd step = h.ldlt().solve(g);

            Eigen::VectorXd beta_next = beta_ - damping * step.head(d);
            double bias_next = bias_ - damping * step[d];
            Eigen::ArrayXd p_next;
            double loss_next = eval(beta_next, bias_next, p_next);
            if (loss_next <= loss) {
                beta_ = std::move(beta_next);
                bias_ = bias_next;
                loss = loss_next;
                p = std::move(p_next);
                damping = std::min(1.0, damping * 2.0);
            } else {
                damping /= 2.0;
            }
            if (step.norm() < 1e-9)
                break;
        }
    }

    int predict(const Image& image) const override {
        double z = features(image).dot(beta_) + bias_;
        return z >= 0.0 ? 1 : 0;
    }

    std::vector<double> loss_curve() const override { return loss_curve_; }
    std::vector<double> accuracy_curve() const override { return accuracy_curve_; }

private:
    Eigen::Index dim() const { return Eigen::Index(thumb_) * thumb_ + 2 * native_cols_; }

    Eigen::VectorXd features(const Image& img) const {
        Eigen::VectorXd v(dim());
        for (int by = 0; by < thumb_; ++by) {
            int y0 = img.height * by / thumb_;
            int y1 = std::max(y0 + 1, img.height * (by + 1) / thumb_);
            for (int bx = 0; bx < thumb_; ++bx) {
                int x0 = img.width * bx / thumb_;
                int x1 = std::max(x0 + 1, img.width * (bx + 1) / thumb_);
                double sum = 0.0;
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x)
                        sum += (img.at(x, y, 0) + img.at(x, y, 1) + img.at(x, y, 2)) /
                               (3.0 * 255.0);
                v[by * thumb_ + bx] = sum / ((y1 - y0) * (x1 - x0)) - 0.5;
            }
        }
        Eigen::Index base = Eigen::Index(thumb_) * thumb_;
        for (int row = 0; row < 2; ++row)
            for (int xc = 0; xc < native_cols_; ++xc) {
                int yy = std::min(row, img.height - 1);
                int xx = std::min(xc, img.width - 1);
                v[base + row * native_cols_ + xc] =
                    (img.at(xx, yy, 0) + img.at(xx, yy, 1) + img.at(xx, yy, 2)) /
                        (3.0 * 255.0) -
                    0.5;
            }
        return v;
    }

    int thumb_;
    int epochs_;
    double lr_;
    double l2_;
    int native_cols_ = 64;
    Eigen::VectorXd beta_;
    double bias_ = 0.0;
    std::vector<double> loss_curve_;
    std::vector<double> accuracy_curve_;
};

} // namespace

std::unique_ptr<BinaryClassifier> make_linear_probe(int thumb_size, int epochs,
                                                    double learning_rate, double l2) {
    return std::make_unique<LinearProbe>(thumb_size, epochs, learning_rate, l2);
}

HarnessReport gender_harness_run(BinaryClassifier& model, const std::vector<LabeledImage>& train,
                                 const std::vector<LabeledImage>& test, std::uint64_t seed) {
    require(!train.empty() && !test.empty(), ErrorKind::Shape,
            "gender harness: empty train or test set");

    auto check_classes = [](const std::vector<LabeledImage>& set, const char* which) {
        bool has0 = false, has1 = false;
        for (const auto& s : set)
            (s.label ? has1 : has0) = true;
        require(has0 && has1, ErrorKind::Shape,
                std::string("gender harness: ") + which + " set is missing a class");
    };
    check_classes(train, "train");
    check_classes(test, "test");

    // train/test disjointness enforced by content digest
    std::set<std::string> train_digests;
    for (const auto& s : train)
        train_digests.insert(sha256_hex(s.image.rgb.data(), s.image.rgb.size()));
    for (const auto& s : test)
        require(!train_digests.count(sha256_hex(s.image.rgb.data(), s.image.rgb.size())),
                ErrorKind::State, "gender harness: train/test overlap detected by digest");

    std::vector<Image> images;
    std::vector<int> labels;
    for (const auto& s : train) {
        images.push_back(s.image);
        labels.push_back(s.label);
    }
    model.train(images, labels, seed);

    HarnessReport report;
    report.model = model.name();
    report.train_size = train.size();
    report.test_size = test.size();
    report.loss_curve = model.loss_curve();
    report.accuracy_curve = model.accuracy_curve();
    std::size_t correct = 0;
    for (const auto& s : test)
        if (model.predict(s.image) == s.label)
            ++correct;
    report.test_accuracy = double(correct) / double(test.size());
    return report;
}

} // namespace faceforge
