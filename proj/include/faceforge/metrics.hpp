#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "faceforge/image.hpp"

namespace faceforge {

// Deterministic image -> feature-vector extractor.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string name() const = 0;
    virtual int dim() const = 0;
    virtual Eigen::VectorXd embed(const Image& image) const = 0;
};

// Reads the toy metadata strip's identity block; attribute edits leave it
// untouched, so it isolates subject identity. Throws on non-toy images.
std::unique_ptr<Embedder> make_toy_identity_embedder();

// Generic fallback: 8x8 grayscale thumbnail (dim 64). Works on any image.
std::unique_ptr<Embedder> make_pixel_embedder();

std::unique_ptr<Embedder> make_embedder(const std::string& name);

// Mean + covariance (divisor n, maximum-likelihood convention) of an
// embedding population.
struct ActivationStats {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    std::size_t n = 0;
};

// Merge-based accumulator: partial accumulators combine exactly, so the
// reduction is order-independent up to float rounding and parallelizable.
class StatsAccumulator {
public:
    void add(const Eigen::VectorXd& v);
    void merge(const StatsAccumulator& other);
    ActivationStats finalize() const; // requires n >= 2

    std::size_t count() const { return n_; }

private:
    std::size_t n_ = 0;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd comoment_; // sum of (x-mean)(x-mean)^T, updated online
};

ActivationStats accumulate_stats(const std::vector<Eigen::VectorXd>& embeddings);

// Principal square root S of sigma_a * sigma_b via the symmetrized
// eigendecomposition route; S*S reproduces the product on well-conditioned
// inputs. Negative eigenvalues are clamped to zero.
Eigen::MatrixXd sqrt_product(const Eigen::MatrixXd& sigma_a, const Eigen::MatrixXd& sigma_b);

// ||mu_a - mu_b||^2 + Tr(sigma_a + sigma_b - 2 sqrt(sigma_a sigma_b)).
// Near-singular covariances (smallest eigenvalue below 1e-10 of the scale)
// get eps*I with eps = 1e-6 added to both before the square root.
double frechet_distance(const ActivationStats& a, const ActivationStats& b);

struct SimilarityMatrix {
    Eigen::MatrixXd scores;
    std::vector<std::string> row_ids;
    std::vector<std::string> col_ids;
};

SimilarityMatrix cosine_similarity_matrix(const Embedder& embedder,
                                          const std::vector<Image>& images_a,
                                          const std::vector<Image>& images_b,
                                          const std::vector<std::string>& ids_a = {},
                                          const std::vector<std::string>& ids_b = {});

// Stats serialization through the array container (mu, sigma, n).
void save_stats(const std::string& base_path, const ActivationStats& stats);
ActivationStats load_stats(const std::string& base_path);

} // namespace faceforge
