#include "faceforge/inversion.hpp"

#include <algorithm>
#include <cmath>

#include "faceforge/common.hpp"
#include "faceforge/rng.hpp"

namespace faceforge {

namespace {

LatentW broadcast(const std::vector<double>& v) {
    LatentW w;
    w.source = LatentSource::InvertedFromImage;
    for (int r = 0; r < kLatentRows; ++r)
        for (int i = 0; i < kLatentDim; ++i)
            w.row(r)[i] = v[std::size_t(i)];
    return w;
}

double pixel_mse(const ImageF& render, const std::vector<double>& target01) {
    double sum = 0.0;
    for (std::size_t i = 0; i < target01.size(); ++i) {
        double d = render.rgb[i] - target01[i];
        sum += d * d;
    }
    return sum / double(target01.size());
}

} // namespace

InversionResult invert(const GeneratorBackend& backend, const RenderedImage& target,
                       const InversionConfig& cfg) {
    auto [h, w] = backend.output_size();
    require(target.pixels.height == h && target.pixels.width == w, ErrorKind::Shape,
            "invert: target dimensions do not match backend output size");
    require(cfg.max_iters >= 0 && cfg.step_size > 0 && cfg.tolerance > 0 &&
                cfg.probe_step > 0 && cfg.regularizer_weight >= 0,
            ErrorKind::Config, "invert: invalid inversion config");

    std::vector<double> target01(target.pixels.rgb.size());
    for (std::size_t i = 0; i < target01.size(); ++i)
        target01[i] = target.pixels.rgb[i] / 255.0;

    // broadcast average of the backend's mean latent
    std::vector<double> v_avg(kLatentDim, 0.0);
    for (int r = 0; r < kLatentRows; ++r)
        for (int i = 0; i < kLatentDim; ++i)
            v_avg[std::size_t(i)] += backend.w_avg().row(r)[i] / double(kLatentRows);

    std::vector<double> v = v_avg;
    if (cfg.init == InversionInit::Random) {
        SeededRng rng(cfg.seed);
        for (double& x : v)
            x = rng.gaussian();
    }

    std::vector<std::vector<double>> probes = backend.probe_directions();
    if (probes.empty()) {
        probes.assign(kLatentDim, std::vector<double>(kLatentDim, 0.0));
        for (int i = 0; i < kLatentDim; ++i)
            probes[std::size_t(i)][std::size_t(i)] = 1.0;
    }

    auto loss_of = [&](const std::vector<double>& vv, double* mse_out = nullptr) {
        ImageF render = backend.render_continuous(broadcast(vv));
        double mse = pixel_mse(render, target01);
        double reg = 0.0;
        for (int i = 0; i < kLatentDim; ++i) {
            double d = vv[std::size_t(i)] - v_avg[std::size_t(i)];
            reg += d * d;
        }
        double total = mse + cfg.regularizer_weight * reg;
        require(std::isfinite(total), ErrorKind::Numeric,
                "invert: non-finite loss (mse=" + std::to_string(mse) + ")");
        if (mse_out)
            *mse_out = mse;
        return total;
    };

    InversionResult result;
    double best_mse = 0.0;
    double best_loss = loss_of(v, &best_mse);
    std::vector<double> best_v = v;
    result.best_loss_history.push_back(best_loss);

    // Newton-diagonal descent over the probe directions: central differences
    // give slope and curvature per direction, the step scales each component
    // by 1/curvature, and step halving on loss increase keeps the best-so-far
    // loss monotone. The probe baseline starts wide so flat spots between
    // non-overlapping edges still show a slope, then anneals down to
    // cfg.probe_step; per-direction moves are capped to avoid saturation
    // runaways.
    double factor = std::min(1.0, cfg.step_size);
    const double kMoveCap = 0.5;
    std::vector<double> probe_v(kLatentDim);
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        result.iterations_used = iter + 1;
        // probe width re-anneals in cycles; a wide pass can pull the state
        // out of a compensated basin whenever the true basin is lower
        double delta = std::max(cfg.probe_step, 0.5 * std::pow(0.75, iter % 40));

        double pixel_at_best = 0.0;
        loss_of(best_v, &pixel_at_best);

        std::vector<double> slopes(probes.size()), curvs(probes.size());
        double max_curv = 0.0;
        for (std::size_t k = 0; k < probes.size(); ++k) {
            const auto& dir = probes[k];
            for (int i = 0; i < kLatentDim; ++i)
                probe_v[std::size_t(i)] = best_v[std::size_t(i)] + delta * dir[std::size_t(i)];
            double plus = pixel_mse(backend.render_continuous(broadcast(probe_v)), target01);
            for (int i = 0; i < kLatentDim; ++i)
                probe_v[std::size_t(i)] = best_v[std::size_t(i)] - delta * dir[std::size_t(i)];
            double minus = pixel_mse(backend.render_continuous(broadcast(probe_v)), target01);

            double along = 0.0; // component of (v - v_avg) along this direction
            for (int i = 0; i < kLatentDim; ++i)
                along += (best_v[std::size_t(i)] - v_avg[std::size_t(i)]) * dir[std::size_t(i)];

            slopes[k] = (plus - minus) / (2.0 * delta) + 2.0 * cfg.regularizer_weight * along;
            curvs[k] = (plus + minus - 2.0 * pixel_at_best) / (delta * delta) +
                       2.0 * cfg.regularizer_weight;
            max_curv = std::max(max_curv, curvs[k]);
        }

        double curv_floor = std::max(1e-12, 1e-4 * max_curv);
        std::vector<double> cand = best_v;
        for (std::size_t k = 0; k < probes.size(); ++k) {
            double move = -slopes[k] / std::max(curvs[k], curv_floor);
            // trust region shrinks with the factor so halving always bites
            move = factor * std::clamp(move, -kMoveCap, kMoveCap);
            for (int i = 0; i < kLatentDim; ++i)
                cand[std::size_t(i)] += move * probes[k][std::size_t(i)];
        }

        double cand_mse = 0.0;
        double cand_loss = loss_of(cand, &cand_mse);
        if (cand_loss <= best_loss) {
            double improvement = best_loss - cand_loss;
            best_loss = cand_loss;
            best_mse = cand_mse;
            best_v = std::move(cand);
            result.best_loss_history.push_back(best_loss);
            factor = std::min(factor * 2.0, std::min(1.0, cfg.step_size));
            if (improvement < cfg.tolerance && delta <= cfg.probe_step) {
                result.converged = true;
                break;
            }
        } else {
            factor /= 2.0;
            result.best_loss_history.push_back(best_loss);
            if (factor < 1e-10 && delta <= cfg.probe_step) {
                result.converged = true;
                break;
            }
            factor = std::max(factor, 1e-9);
        }
    }

    result.w_star = broadcast(best_v);
    result.final_loss = best_loss;
    result.final_pixel_mse = best_mse;
    return result;
}

RenderedImage invert_then_edit(const GeneratorBackend& backend, const RenderedImage& target,
                               const SemanticDirection& direction, double coeff,
                               const InversionConfig& cfg) {
    InversionResult inv = invert(backend, target, cfg);
    return backend.synthesize(apply_direction(inv.w_star, direction, coeff));
}

} // namespace faceforge
