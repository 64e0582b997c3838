#include "sv/verify.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sv/error.hpp"

namespace sv {

using nlohmann::json;

const char* law_name(Law law) {
    switch (law) {
        case Law::newton: return "newton";
        case Law::penetration: return "penetration";
        case Law::gravity: return "gravity";
        case Law::deformation: return "deformation";
    }
    return "?";
}

const LawScore& VerificationReport::law(Law l) const {
    for (const LawScore& s : laws)
        if (s.law == l) return s;
    return laws[0];
}

void VerifierWeights::validate() const {
    const double law_sum = lambda_laws[0] + lambda_laws[1] + lambda_laws[2] + lambda_laws[3];
    if (lambda_sem < 0 || lambda_phys < 0 ||
        std::any_of(lambda_laws.begin(), lambda_laws.end(), [](double w) { return w < 0; }))
        throw Error(ErrorCode::WeightError, "weights must be non-negative");
    if (std::abs(lambda_sem + lambda_phys - 1.0) > 1e-9)
        throw Error(ErrorCode::WeightError, "lambda_sem + lambda_phys must equal 1");
    if (std::abs(law_sum - 1.0) > 1e-9)
        throw Error(ErrorCode::WeightError, "per-law weights must sum to 1");
}

namespace {

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(4);
    out << v;
    return out.str();
}

/// 1 at or below lo, 0 at or above hi, linear between.
double falling_band(double value, double lo, double hi) {
    if (value <= lo) return 1.0;
    if (value >= hi) return 0.0;
    return (hi - value) / (hi - lo);
}

std::vector<std::string> candidate_object_ids(const TrajectoryCandidate& candidate) {
    std::vector<std::string> ids;
    if (candidate.frames.empty()) return ids;
    for (const auto& [id, box] : candidate.frames.front()) ids.push_back(id);
    return ids;
}

std::vector<Vec2> centers_of(const TrajectoryCandidate& candidate, const std::string& id) {
    std::vector<Vec2> centers;
    centers.reserve(candidate.frames.size());
    for (const auto& frame : candidate.frames) centers.push_back(bbox_center(frame.at(id)));
    return centers;
}

/// Least-squares quadratic coefficient of y(t), t = 0..n-1, via centered
/// time; symmetry zeroes the odd moments so the normal equations collapse
/// to a 2x2 solve.
double quadratic_coefficient(const std::vector<double>& y) {
    const size_t n = y.size();
    const double mid = (static_cast<double>(n) - 1.0) / 2.0;
    double s2 = 0, s4 = 0, sy = 0, s2y = 0;
    for (size_t t = 0; t < n; ++t) {
        const double s = static_cast<double>(t) - mid;
        const double ss = s * s;
        s2 += ss;
        s4 += ss * ss;
        sy += y[t];
        s2y += ss * y[t];
    }
    const double det = static_cast<double>(n) * s4 - s2 * s2;
    if (det == 0.0) return 0.0;
    return (static_cast<double>(n) * s2y - s2 * sy) / det;
}

}  // namespace

LawScore verify_semantic_local(const TrajectoryCandidate& candidate, const SubInstruction& sub,
                               const GoalSpec& goal) {
    LawScore out;
    out.law = Law::newton;  // unused tag; semantic is reported separately
    if (candidate.frames.empty() || sub.moving_ids.empty()) {
        out.score = 0.0;
        out.explanation = "no frames or no moving objects";
        return out;
    }
    const std::string& primary = sub.moving_ids.front();
    const Vec2 first = bbox_center(candidate.frames.front().at(primary));
    const Vec2 final = bbox_center(candidate.frames.back().at(primary));

    double total = 0.0;
    int terms = 0;
    std::ostringstream why;
    if (goal.goal_region) {
        const Vec2 target = bbox_center(*goal.goal_region);
        double term = 1.0;
        if (!goal.goal_region->contains(final)) {
            const double dist = (final - target).norm();
            term = 1.0 - std::clamp(dist / std::numbers::sqrt2, 0.0, 1.0);
            why << "final center " << fmt(dist) << " from goal region center; ";
        } else {
            why << "final center inside goal region; ";
        }
        total += term;
        ++terms;
    }
    if (goal.direction) {
        const Vec2 net = final - first;
        double cosine = 0.0;  // zero net displacement counts as neutral
        if (net.norm() > 1e-12) cosine = net.dot(*goal.direction) / net.norm();
        total += (1.0 + cosine) / 2.0;
        ++terms;
        why << "net displacement cosine " << fmt(cosine);
    }
    out.score = terms > 0 ? total / terms : 0.0;
    out.explanation = why.str();
    return out;
}

LawScore verify_newton(const TrajectoryCandidate& candidate, const SubInstruction& sub,
                       const VerifierThresholds& th) {
    LawScore out;
    out.law = Law::newton;
    const int frames = static_cast<int>(candidate.frames.size());
    if (frames < 3) {
        out.score = 1.0;
        out.explanation = "fewer than 3 frames; acceleration not evaluated";
        return out;
    }

    double score = 1.0;
    std::ostringstream why;
    for (const std::string& id : candidate_object_ids(candidate)) {
        const std::vector<Vec2> centers = centers_of(candidate, id);
        double max_accel = 0.0, max_speed = 0.0;
        for (size_t t = 0; t + 1 < centers.size(); ++t) {
            const Vec2 v = centers[t + 1] - centers[t];
            max_speed = std::max(max_speed, v.norm());
            if (t + 2 < centers.size()) {
                const Vec2 a = (centers[t + 2] - centers[t + 1]) - v;
                max_accel = std::max(max_accel, a.norm());
            }
        }
        double obj_score = falling_band(max_accel, th.accel_ok, th.accel_zero);
        if (max_speed > th.jump) {
            obj_score = std::min(obj_score, 0.3);
            why << id << ": jump of " << fmt(max_speed) << " in one frame; ";
        } else if (max_accel > th.accel_ok) {
            why << id << ": peak acceleration " << fmt(max_accel) << "; ";
        }
        score = std::min(score, obj_score);
    }
    out.score = score;
    out.explanation = why.str().empty() ? "motion is smooth" : why.str();
    (void)sub;
    return out;
}

LawScore verify_penetration(const TrajectoryCandidate& candidate, const SceneBundle& scene,
                            const VerifierThresholds& th) {
    LawScore out;
    out.law = Law::penetration;
    const MaskIntegral integral(scene.static_mask);
    double worst = 0.0;
    std::string worst_id;
    int worst_frame = 0;

    int t = 0;
    for (const auto& frame : candidate.frames) {
        for (const auto& [id, box] : frame) {
            const PixelRect rect = rasterize(box, scene.width(), scene.height());
            const long long area =
                static_cast<long long>(rect.width()) * std::max(rect.height(), 0);
            if (area <= 0) continue;
            const double frac =
                static_cast<double>(integral.sum(rect)) / static_cast<double>(area);
            if (frac > worst) {
                worst = frac;
                worst_id = id;
                worst_frame = t;
            }
        }
        ++t;
    }
    out.score = falling_band(worst, th.overlap_free, th.overlap_full);
    if (worst > th.overlap_free)
        out.explanation = worst_id + " overlaps static elements by " + fmt(worst) +
                          " of its box at frame " + std::to_string(worst_frame);
    else
        out.explanation = "no meaningful overlap with static elements";
    return out;
}

LawScore verify_gravity(const TrajectoryCandidate& candidate, const SceneBundle& scene,
                        const VerifierThresholds& th) {
    LawScore out;
    out.law = Law::gravity;
    const MaskIntegral integral(scene.static_mask);
    const int w = scene.width(), h = scene.height();

    double score = 1.0;
    std::ostringstream why;
    for (const std::string& id : candidate_object_ids(candidate)) {
        // Supported when the probe band below the box bottom touches the
        // ground line, a static-mask pixel, or another object's top edge.
        std::vector<bool> unsupported(candidate.frames.size(), false);
        for (size_t t = 0; t < candidate.frames.size(); ++t) {
            const BBox& box = candidate.frames[t].at(id);
            bool supported = scene.ground_line <= box.y_max + th.support_band;
            if (!supported) {
                const int x0 = round_half_up(box.x_min * w);
                const int x1 = round_half_up(box.x_max * w);
                const int y0 = round_half_up(box.y_max * h);
                const int y1 = round_half_up(std::min(box.y_max + th.support_band, 1.0) * h);
                supported = integral.sum(x0, y0, x1, y1) > 0;
            }
            if (!supported) {
                auto rests_on = [&](const BBox& other) {
                    const bool x_overlap = std::min(box.x_max, other.x_max) >
                                           std::max(box.x_min, other.x_min);
                    return x_overlap && other.y_min >= box.y_max - th.stack_adjacency &&
                           other.y_min <= box.y_max + th.support_band;
                };
                for (const auto& [other_id, other_box] : candidate.frames[t])
                    if (other_id != id && rests_on(other_box)) supported = true;
                for (const ObjectAsset& obj : scene.objects)
                    if (obj.id != id && !candidate.frames[t].contains(obj.id) &&
                        rests_on(obj.initial_box))
                        supported = true;
            }
            unsupported[t] = !supported;
        }

        // Maximal unsupported runs of length >= 3: quadratic arc fit plus
        // hover detection on the vertical center trace.
        size_t t = 0;
        while (t < unsupported.size()) {
            if (!unsupported[t]) {
                ++t;
                continue;
            }
            size_t end = t;
            while (end < unsupported.size() && unsupported[end]) ++end;
            const size_t run = end - t;
            if (run >= 3) {
                std::vector<double> ys;
                ys.reserve(run);
                for (size_t i = t; i < end; ++i)
                    ys.push_back(bbox_center(candidate.frames[i].at(id)).y);
                double travel = 0.0;
                for (size_t i = 1; i < ys.size(); ++i) travel += std::abs(ys[i] - ys[i - 1]);
                const double coeff = quadratic_coefficient(ys);
                const bool hovering =
                    run >= static_cast<size_t>(th.hover_min_run) && travel < th.hover_travel;
                if (hovering) {
                    score = std::min(score, 0.2);
                    why << id << ": hovers unsupported for " << run << " frames; ";
                } else if (coeff < th.gravity_min) {
                    score = std::min(score, 0.2);
                    why << id << ": unsupported run of " << run
                        << " frames lacks downward acceleration (coefficient " << fmt(coeff)
                        << "); ";
                }
            }
            t = end;
        }
    }
    out.score = score;
    out.explanation = why.str().empty() ? "vertical motion is supported or ballistic" : why.str();
    return out;
}

LawScore verify_deformation(const TrajectoryCandidate& candidate, const SceneBundle& scene,
                            const VerifierThresholds& th) {
    LawScore out;
    out.law = Law::deformation;
    if (candidate.frames.empty()) {
        out.explanation = "no frames";
        return out;
    }
    double score = 1.0;
    std::ostringstream why;
    for (const std::string& id : candidate_object_ids(candidate)) {
        const ObjectAsset* asset = scene.find_object(id);
        if (asset && asset->resizable) continue;
        const BBox& first = candidate.frames.front().at(id);
        double drift = 0.0;
        for (const auto& frame : candidate.frames) {
            const BBox& box = frame.at(id);
            drift = std::max(drift, std::abs(box.width() / first.width() - 1.0));
            drift = std::max(drift, std::abs(box.height() / first.height() - 1.0));
        }
        const double obj_score = falling_band(drift, th.deform_free, th.deform_full);
        if (drift > th.deform_free) why << id << ": size drifts by " << fmt(drift) << "; ";
        score = std::min(score, obj_score);
    }
    out.score = score;
    out.explanation = why.str().empty() ? "object sizes stay stable" : why.str();
    return out;
}

double combine(double semantic, const std::array<LawScore, 4>& laws,
               const VerifierWeights& weights) {
    weights.validate();
    auto check = [](double s, const char* what) {
        if (!(s >= 0.0 && s <= 1.0))
            throw Error(ErrorCode::WeightError, std::string(what) + " score outside [0,1]");
    };
    check(semantic, "semantic");
    double physics = 0.0;
    for (size_t i = 0; i < laws.size(); ++i) {
        check(laws[i].score, law_name(laws[i].law));
        physics += weights.lambda_laws[i] * laws[i].score;
    }
    return weights.lambda_sem * semantic + weights.lambda_phys * physics;
}

LocalVerifier::LocalVerifier(VerifierThresholds thresholds) : thresholds_(thresholds) {}

VerificationReport LocalVerifier::verify(const VideoSketch& sketch,
                                         const TrajectoryCandidate& candidate,
                                         const SubInstruction& sub, const SceneBundle& scene,
                                         const VerifierWeights& weights) {
    (void)sketch;  // deterministic checks run on the candidate geometry
    if (!sub.goal)
        throw Error(ErrorCode::ManifestInvalid,
                    "sub-instruction " + std::to_string(sub.index) + " has no goal");
    VerificationReport report;
    const LawScore sem = verify_semantic_local(candidate, sub, *sub.goal);
    report.semantic = sem.score;
    report.semantic_explanation = sem.explanation;
    report.laws = {verify_newton(candidate, sub, thresholds_),
                   verify_penetration(candidate, scene, thresholds_),
                   verify_gravity(candidate, scene, thresholds_),
                   verify_deformation(candidate, scene, thresholds_)};
    report.combined = combine(report.semantic, report.laws, weights);
    return report;
}

std::optional<double> descriptive_score(const std::string& text) {
    std::string lower(text.size(), '\0');
    std::transform(text.begin(), text.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    // Longer phrases first: "inconsistent" contains "consistent".
    static const std::pair<const char*, double> rules[] = {
        {"very inconsistent", 0.1}, {"somewhat inconsistent", 0.7}, {"inconsistent", 0.4},
        {"very consistent", 1.0},   {"somewhat consistent", 0.8},   {"consistent", 0.9},
    };
    for (const auto& [phrase, value] : rules)
        if (lower.find(phrase) != std::string::npos) return value;
    return std::nullopt;
}

std::pair<double, std::string> parse_verifier_reply(const std::string& text) {
    const size_t open = text.find('{');
    if (open != std::string::npos) {
        int depth = 0;
        size_t close = std::string::npos;
        for (size_t i = open; i < text.size(); ++i) {
            if (text[i] == '{') ++depth;
            if (text[i] == '}' && --depth == 0) {
                close = i;
                break;
            }
        }
        if (close != std::string::npos) {
            json doc;
            bool parsed = true;
            try {
                doc = json::parse(text.substr(open, close - open + 1));
            } catch (const json::exception&) {
                parsed = false;
            }
            if (parsed && doc.is_object()) {
                std::string explanation;
                if (doc.contains("explanation") && doc["explanation"].is_string())
                    explanation = doc["explanation"].get<std::string>();
                if (doc.contains("score")) {
                    if (doc["score"].is_number()) {
                        double score = doc["score"].get<double>();
                        if (score < 0.0 || score > 1.0) {
                            explanation += " [score clamped from " + fmt(score) + "]";
                            score = std::clamp(score, 0.0, 1.0);
                        }
                        return {score, explanation};
                    }
                    if (doc["score"].is_string())
                        if (auto mapped = descriptive_score(doc["score"].get<std::string>()))
                            return {*mapped, explanation};
                }
                if (auto mapped = descriptive_score(explanation)) return {*mapped, explanation};
            }
        }
    }
    if (auto mapped = descriptive_score(text)) return {*mapped, text};
    throw Error(ErrorCode::ParseError, "no score found in verifier reply");
}

std::string report_to_json(const VerificationReport& report, const VerifierWeights& weights) {
    json doc;
    doc["semantic"] = {{"score", report.semantic}, {"explanation", report.semantic_explanation}};
    doc["laws"] = json::object();
    for (const LawScore& law : report.laws)
        doc["laws"][law_name(law.law)] = {{"score", law.score}, {"explanation", law.explanation}};
    doc["weights"] = {{"semantic", weights.lambda_sem},
                      {"physics", weights.lambda_phys},
                      {"laws", weights.lambda_laws}};
    doc["combined"] = report.combined;
    return doc.dump(2);
}

}  // namespace sv
