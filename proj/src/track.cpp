#include "sv/track.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "sv/error.hpp"
#include "sv/transport.hpp"

namespace sv {

using nlohmann::json;

namespace {

constexpr double kJunctionTolerance = 1e-6;

bool same_point(const Vec2& a, const Vec2& b) {
    return std::abs(a.x - b.x) <= kJunctionTolerance && std::abs(a.y - b.y) <= kJunctionTolerance;
}

}  // namespace

std::vector<SparseTrack> concat_plan(const std::vector<SubInstructionResult>& segments) {
    // Object order: first appearance across segments.
    std::vector<std::string> order;
    std::set<std::string> seen;
    for (const SubInstructionResult& segment : segments)
        for (const std::string& id : segment.sub.moving_ids)
            if (seen.insert(id).second) order.push_back(id);

    std::vector<SparseTrack> tracks;
    for (const std::string& id : order) {
        SparseTrack track;
        track.id = id;
        bool appeared = false;
        bool vanished = false;
        bool moved_previous = false;

        for (const SubInstructionResult& segment : segments) {
            const bool moves =
                std::find(segment.sub.moving_ids.begin(), segment.sub.moving_ids.end(), id) !=
                segment.sub.moving_ids.end();
            const int frames = segment.sub.frame_budget;

            if (moves) {
                if (vanished)
                    throw Error(ErrorCode::ObjectMismatch,
                                "\"" + id + "\" reappears after vanishing mid-plan");
                const Vec2 first = bbox_center(segment.selected.frames.front().at(id));
                int start = 0;
                // Junction duplicate between consecutive moving segments.
                if (moved_previous && !track.points.empty() && same_point(track.points.back(), first))
                    start = 1;
                for (int t = start; t < frames; ++t)
                    track.points.push_back(bbox_center(segment.selected.frames[t].at(id)));
                appeared = true;
                moved_previous = true;
            } else {
                if (appeared) {
                    // Held at its last point for this segment's frames.
                    vanished = true;
                    const Vec2 hold = track.points.back();
                    for (int t = 0; t < frames; ++t) track.points.push_back(hold);
                } else {
                    // Not on stage yet; position filled in below once known.
                    track.points.insert(track.points.end(), frames, Vec2{});
                }
                moved_previous = false;
            }
        }

        // Backfill any pre-appearance frames with the first known point.
        if (appeared) {
            Vec2 first{};
            bool found = false;
            size_t first_known = 0;
            for (const SubInstructionResult& segment : segments) {
                const bool moves =
                    std::find(segment.sub.moving_ids.begin(), segment.sub.moving_ids.end(), id) !=
                    segment.sub.moving_ids.end();
                if (moves) {
                    first = bbox_center(segment.selected.frames.front().at(id));
                    found = true;
                    break;
                }
                first_known += segment.sub.frame_budget;
            }
            if (found)
                for (size_t t = 0; t < first_known && t < track.points.size(); ++t)
                    track.points[t] = first;
        }
        tracks.push_back(std::move(track));
    }
    return tracks;
}

DenseTrack interpolate_dense(const SparseTrack& sparse, int frame_count) {
    const int p = static_cast<int>(sparse.points.size());
    if (p < 2) throw Error(ErrorCode::BadLength, "need at least 2 sparse points, got " +
                                                     std::to_string(p));
    if (frame_count < p)
        throw Error(ErrorCode::BadLength, "dense length " + std::to_string(frame_count) +
                                              " < sparse length " + std::to_string(p));

    DenseTrack dense;
    dense.id = sparse.id;
    dense.points.reserve(frame_count);
    for (int j = 0; j < frame_count; ++j) {
        if (j == 0) {
            dense.points.push_back(sparse.points.front());
            continue;
        }
        if (j == frame_count - 1) {
            dense.points.push_back(sparse.points.back());
            continue;
        }
        const double u = static_cast<double>(j) * (p - 1) / (frame_count - 1);
        const int i0 = std::min(static_cast<int>(u), p - 2);
        const double frac = u - i0;
        dense.points.push_back(lerp(sparse.points[i0], sparse.points[i0 + 1], frac));
    }
    return dense;
}

void write_track_file(const std::vector<DenseTrack>& tracks, const std::filesystem::path& path,
                      const TrackFileMeta& meta) {
    if (tracks.empty()) throw Error(ErrorCode::LengthMismatch, "no tracks to write");
    const size_t frames = tracks.front().points.size();
    for (const DenseTrack& track : tracks)
        if (track.points.size() != frames)
            throw Error(ErrorCode::LengthMismatch,
                        "track \"" + track.id + "\" has " + std::to_string(track.points.size()) +
                            " points, expected " + std::to_string(frames));

    json doc;
    doc["version"] = 1;
    doc["prompt"] = meta.prompt;
    doc["frames"] = static_cast<int>(frames);
    doc["fps"] = meta.fps;
    doc["resolution"] = {meta.width, meta.height};
    doc["tracks"] = json::array();
    for (const DenseTrack& track : tracks) {
        json points = json::array();
        for (const Vec2& q : track.points) points.push_back({q.x, q.y});
        doc["tracks"].push_back({{"id", track.id}, {"points", points}});
    }

    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << doc.dump(2) << "\n";
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

TrackFile read_track_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("track file: ") + e.what());
    }

    TrackFile file;
    file.frames = doc.at("frames").get<int>();
    file.meta.prompt = doc.value("prompt", "");
    file.meta.fps = doc.value("fps", 0.0);
    if (doc.contains("resolution") && doc["resolution"].is_array() &&
        doc["resolution"].size() == 2) {
        file.meta.width = doc["resolution"][0].get<int>();
        file.meta.height = doc["resolution"][1].get<int>();
    }
    for (const json& entry : doc.at("tracks")) {
        DenseTrack track;
        track.id = entry.at("id").get<std::string>();
        for (const json& q : entry.at("points"))
            track.points.push_back({q[0].get<double>(), q[1].get<double>()});
        if (static_cast<int>(track.points.size()) != file.frames)
            throw Error(ErrorCode::LengthMismatch, "track \"" + track.id + "\" length mismatch");
        file.tracks.push_back(std::move(track));
    }
    return file;
}

GeneratorJob generator_client_stub(const std::filesystem::path& track_path,
                                   const Image& initial_frame, const EndpointConfig& config,
                                   bool dry_run) {
    std::ifstream in(track_path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + track_path.string());
    json track;
    try {
        track = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("track file: ") + e.what());
    }

    json payload;
    payload["track"] = track;
    payload["initial_frame_png_b64"] = png_base64(initial_frame);
    payload["model"] = config.model;

    GeneratorJob job;
    if (dry_run) {
        job.payload_path = track_path;
        job.payload_path.replace_extension(".payload.json");
        std::ofstream out(job.payload_path);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + job.payload_path.string());
        out << payload.dump(2) << "\n";
        job.job_id = "dry-run";
        return job;
    }

    if (config.url.empty() && config.mode != EndpointConfig::Mode::replay)
        throw Error(ErrorCode::TransportError, "no generation endpoint configured");

    ChatRequest request;
    request.model = config.model;
    request.temperature = 0.0;
    request.messages.push_back({"user", payload.dump(), {}});
    ChatClient client(config);
    job.job_id = client.complete(request);
    return job;
}

}  // namespace sv
