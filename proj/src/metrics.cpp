#include "faceforge/metrics.hpp"

#include <cmath>

#include "faceforge/common.hpp"
#include "faceforge/container.hpp"
#include "faceforge/parallel.hpp"
#include "faceforge/generator.hpp"

namespace faceforge {

namespace {

class ToyIdentityEmbedder final : public Embedder {
public:
    std::string name() const override { return "toy-identity"; }
    int dim() const override { return ToyGenerator::kIdentityDim; }

    Eigen::VectorXd embed(const Image& image) const override {
        auto params = ToyGenerator::decode_strip(image);
        require(params.has_value(), ErrorKind::Inference,
                "toy-identity embedder: image has no toy metadata strip");
        Eigen::VectorXd v(dim());
        for (int i = 0; i < dim(); ++i)
            v[i] = params->identity[i];
        return v;
    }
};

class PixelEmbedder final : public Embedder {
public:
    std::string name() const override { return "pixel"; }
    int dim() const override { return 64; }

    Eigen::VectorXd embed(const Image& image) const override {
        require(image.width > 0 && image.height > 0, ErrorKind::Shape,
                "pixel embedder: empty image");
        Eigen::VectorXd v = Eigen::VectorXd::Zero(64);
        // 8x8 box-filter grayscale thumbnail
        for (int by = 0; by < 8; ++by) {
            int y0 = image.height * by / 8, y1 = std::max(y0 + 1, image.height * (by + 1) / 8);
            for (int bx = 0; bx < 8; ++bx) {
                int x0 = image.width * bx / 8, x1 = std::max(x0 + 1, image.width * (bx + 1) / 8);
                double sum = 0.0;
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x)
                        sum += (image.at(x, y, 0) + image.at(x, y, 1) + image.at(x, y, 2)) /
                               (3.0 * 255.0);
                v[by * 8 + bx] = sum / ((y1 - y0) * (x1 - x0));
            }
        }
        return v;
    }
};

} // namespace

std::unique_ptr<Embedder> make_toy_identity_embedder() {
    return std::make_unique<ToyIdentityEmbedder>();
}

std::unique_ptr<Embedder> make_pixel_embedder() {
    return std::make_unique<PixelEmbedder>();
}

std::unique_ptr<Embedder> make_embedder(const std::string& name) {
    if (name == "toy-identity")
        return make_toy_identity_embedder();
    if (name == "pixel")
        return make_pixel_embedder();
    throw Error(ErrorKind::Load, "unknown embedder: " + name);
}

void StatsAccumulator::add(const Eigen::VectorXd& v) {
    for (int i = 0; i < v.size(); ++i)
        require(std::isfinite(v[i]), ErrorKind::Numeric,
                "accumulate_stats: non-finite component at index " + std::to_string(i));
    if (n_ == 0) {
        n_ = 1;
        mean_ = v;
        comoment_ = Eigen::MatrixXd::Zero(v.size(), v.size());
        return;
    }
    require(v.size() == mean_.size(), ErrorKind::Shape,
            "accumulate_stats: inconsistent embedding dimension");
    // Welford/Chan update
    n_ += 1;
    Eigen::VectorXd delta = v - mean_;
    mean_ += delta / double(n_);
    Eigen::VectorXd delta2 = v - mean_;
    comoment_ += delta * delta2.transpose();
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
    if (other.n_ == 0)
        return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    require(mean_.size() == other.mean_.size(), ErrorKind::Shape,
            "merge: inconsistent embedding dimension");
    double na = double(n_), nb = double(other.n_);
    Eigen::VectorXd delta = other.mean_ - mean_;
    Eigen::VectorXd mean = mean_ + delta * (nb / (na + nb));
    comoment_ += other.comoment_ + (delta * delta.transpose()) * (na * nb / (na + nb));
    mean_ = mean;
    n_ += other.n_;
}

ActivationStats StatsAccumulator::finalize() const {
    require(n_ >= 2, ErrorKind::Shape, "accumulate_stats needs at least 2 vectors");
    ActivationStats s;
    s.n = n_;
    s.mu = mean_;
    s.sigma = comoment_ / double(n_); // divisor n, ML convention
    s.sigma = (s.sigma + s.sigma.transpose()) / 2.0;
    return s;
}

ActivationStats accumulate_stats(const std::vector<Eigen::VectorXd>& embeddings) {
    StatsAccumulator acc;
    for (const auto& v : embeddings)
        acc.add(v);
    return acc.finalize();
}

Eigen::MatrixXd sqrt_product(const Eigen::MatrixXd& sigma_a, const Eigen::MatrixXd& sigma_b) {
    require(sigma_a.rows() == sigma_a.cols() && sigma_b.rows() == sigma_b.cols() &&
                sigma_a.rows() == sigma_b.rows(),
            ErrorKind::Shape, "sqrt_product: dimension mismatch");

    // A = sigma_a^{1/2}; M = A sigma_b A is symmetric PSD; then
    // sqrt(sigma_a sigma_b) = A sqrt(M) A^{-1} (similar matrices).
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_a(sigma_a);
    require(es_a.info() == Eigen::Success, ErrorKind::Numeric,
            "sqrt_product: eigendecomposition of sigma_a failed");
    Eigen::VectorXd eva = es_a.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd root_a =
        es_a.eigenvectors() * eva.cwiseSqrt().asDiagonal() * es_a.eigenvectors().transpose();

    Eigen::MatrixXd m = root_a * sigma_b * root_a;
    m = (m + m.transpose()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_m(m);
    require(es_m.info() == Eigen::Success, ErrorKind::Numeric,
            "sqrt_product: eigendecomposition of the symmetrized product failed "
            "(condition diagnostic: ||M||=" +
                std::to_string(m.norm()) + ")");
    Eigen::VectorXd evm = es_m.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd root_m =
        es_m.eigenvectors() * evm.cwiseSqrt().asDiagonal() * es_m.eigenvectors().transpose();

    // pseudo-inverse of root_a for the similarity transform back
    double tol = 1e-12 * std::max(1.0, eva.maxCoeff());
    Eigen::VectorXd inv = eva.cwiseSqrt();
    for (int i = 0; i < inv.size(); ++i)
        inv[i] = inv[i] > tol ? 1.0 / inv[i] : 0.0;
    Eigen::MatrixXd root_a_inv =
        es_a.eigenvectors() * inv.asDiagonal() * es_a.eigenvectors().transpose();
    return root_a * root_m * root_a_inv;
}

namespace {

// trace of sqrt(sigma_a sigma_b) without the similarity transform back
double trace_sqrt_product(const Eigen::MatrixXd& sigma_a, const Eigen::MatrixXd& sigma_b) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_a(sigma_a);
    require(es_a.info() == Eigen::Success, ErrorKind::Numeric,
            "frechet_distance: eigendecomposition failed");
    Eigen::VectorXd eva = es_a.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd root_a =
        es_a.eigenvectors() * eva.cwiseSqrt().asDiagonal() * es_a.eigenvectors().transpose();
    Eigen::MatrixXd m = root_a * sigma_b * root_a;
    m = (m + m.transpose()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_m(m);
    require(es_m.info() == Eigen::Success, ErrorKind::Numeric,
            "frechet_distance: eigendecomposition of the symmetrized product failed");
    return es_m.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

} // namespace

double frechet_distance(const ActivationStats& a, const ActivationStats& b) {
    require(a.mu.size() == b.mu.size(), ErrorKind::Shape,
            "frechet_distance: dimension mismatch");
    require(a.n >= 2 && b.n >= 2, ErrorKind::Shape, "frechet_distance: invalid stats");

    // identical distributions are exactly distance zero
    if (a.mu == b.mu && a.sigma == b.sigma)
        return 0.0;

    Eigen::MatrixXd sa = (a.sigma + a.sigma.transpose()) / 2.0;
    Eigen::MatrixXd sb = (b.sigma + b.sigma.transpose()) / 2.0;

    // regularize only when near-singular so well-conditioned results stay exact
    double scale = std::max({1.0, sa.diagonal().maxCoeff(), sb.diagonal().maxCoeff()});
    double min_eig = std::min(
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sa).eigenvalues().minCoeff(),
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sb).eigenvalues().minCoeff());
    if (min_eig < 1e-10 * scale) {
        double eps = 1e-6;
        sa += eps * Eigen::MatrixXd::Identity(sa.rows(), sa.cols());
        sb += eps * Eigen::MatrixXd::Identity(sb.rows(), sb.cols());
    }

    double mean_term = (a.mu - b.mu).squaredNorm();
    double d = mean_term + sa.trace() + sb.trace() - 2.0 * trace_sqrt_product(sa, sb);
    if (d < 0.0) {
        require(d > -1e-6, ErrorKind::Numeric,
                "frechet_distance: structurally negative result " + std::to_string(d));
        d = 0.0;
    }
    return d;
}

SimilarityMatrix cosine_similarity_matrix(const Embedder& embedder,
                                          const std::vector<Image>& images_a,
                                          const std::vector<Image>& images_b,
                                          const std::vector<std::string>& ids_a,
                                          const std::vector<std::string>& ids_b) {
    require(!images_a.empty() && !images_b.empty(), ErrorKind::Shape,
            "cosine_similarity_matrix: empty image list");

    // extraction is parallel per image; the first failing index reports
    auto embed_all = [&](const std::vector<Image>& imgs, const std::vector<std::string>& ids,
                         std::vector<std::string>& out_ids) {
        std::vector<Eigen::VectorXd> es(imgs.size());
        std::vector<std::string> errors(imgs.size());
        parallel_for(imgs.size(), [&](std::size_t i) {
            try {
                es[i] = embedder.embed(imgs[i]);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        });
        for (std::size_t i = 0; i < imgs.size(); ++i) {
            std::string id = i < ids.size() ? ids[i] : "sample-" + std::to_string(i);
            if (!errors[i].empty())
                throw Error(ErrorKind::Inference,
                            "embedder failed on '" + id + "': " + errors[i]);
            out_ids.push_back(id);
        }
        return es;
    };

    SimilarityMatrix sm;
    auto ea = embed_all(images_a, ids_a, sm.row_ids);
    auto eb = embed_all(images_b, ids_b, sm.col_ids);
    sm.scores.resize(Eigen::Index(ea.size()), Eigen::Index(eb.size()));
    for (std::size_t i = 0; i < ea.size(); ++i) {
        for (std::size_t j = 0; j < eb.size(); ++j) {
            double na = ea[i].norm(), nb = eb[j].norm();
            // zero-norm embeddings compare as 0 by convention
            sm.scores(Eigen::Index(i), Eigen::Index(j)) =
                (na > 0.0 && nb > 0.0) ? ea[i].dot(eb[j]) / (na * nb) : 0.0;
        }
    }
    return sm;
}

void save_stats(const std::string& base_path, const ActivationStats& stats) {
    ArrayContainer c;
    std::size_t d = std::size_t(stats.mu.size());
    c.set("mu", "f8", {d}, std::vector<double>(stats.mu.data(), stats.mu.data() + d));
    std::vector<double> sig(d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            sig[i * d + j] = stats.sigma(Eigen::Index(i), Eigen::Index(j));
    c.set("sigma", "f8", {d, d}, std::move(sig));
    c.meta()["n"] = stats.n;
    c.save(base_path);
}

ActivationStats load_stats(const std::string& base_path) {
    ArrayContainer c = ArrayContainer::load(base_path);
    ActivationStats s;
    const auto& mu = c.data("mu");
    s.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), Eigen::Index(mu.size()));
    const auto& shape = c.shape("sigma");
    require(shape.size() == 2 && shape[0] == shape[1] && shape[0] == mu.size(),
            ErrorKind::Shape, "stored sigma has inconsistent shape");
    const auto& sig = c.data("sigma");
    s.sigma.resize(Eigen::Index(shape[0]), Eigen::Index(shape[1]));
    for (std::size_t i = 0; i < shape[0]; ++i)
        for (std::size_t j = 0; j < shape[1]; ++j)
            s.sigma(Eigen::Index(i), Eigen::Index(j)) = sig[i * shape[1] + j];
    s.n = c.meta().value("n", std::size_t(0));
    return s;
}

} // namespace faceforge
