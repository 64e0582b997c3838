#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sv/search.hpp"

namespace sv {

/// Per-object dense point sequence handed to the trajectory-conditioned
/// generator. Exactly frame_count points, all inside [0,1]^2.
struct DenseTrack {
    std::string id;
    std::vector<Vec2> points;
};

struct SparseTrack {
    std::string id;
    std::vector<Vec2> points;
};

/// Per object, box centers across all selected segments in order. Junction
/// duplicates between consecutive moving segments (equal within 1e-6)
/// collapse to one point; an object absent from a later segment is held at
/// its last point for that segment's frames. Throws ObjectMismatch when an
/// object reappears after vanishing.
std::vector<SparseTrack> concat_plan(const std::vector<SubInstructionResult>& segments);

/// Piecewise-linear resample of P points at u_j = (j-1)(P-1)/(T-1); endpoints
/// exact. Requires P >= 2 and T >= P (BadLength otherwise).
DenseTrack interpolate_dense(const SparseTrack& sparse, int frame_count = kOutputFrames);

struct TrackFileMeta {
    double fps = 16.0;
    int width = 0;
    int height = 0;
    std::string prompt;
};

/// Writes {version, prompt, frames, fps, resolution, tracks:[{id, points}]}.
/// Serialization is exact-decimal: a reread compares equal. Throws
/// LengthMismatch when track lengths differ, IoError on write failure.
void write_track_file(const std::vector<DenseTrack>& tracks,
                      const std::filesystem::path& path, const TrackFileMeta& meta);

struct TrackFile {
    int frames = 0;
    TrackFileMeta meta;
    std::vector<DenseTrack> tracks;
};

TrackFile read_track_file(const std::filesystem::path& path);

/// Hands the conditioning file to a generation endpoint. In dry-run mode the
/// request payload is written next to the track file instead; no network.
struct GeneratorJob {
    std::string job_id;
    std::filesystem::path payload_path;  // set in dry-run mode
};

GeneratorJob generator_client_stub(const std::filesystem::path& track_path,
                                   const Image& initial_frame, const EndpointConfig& config,
                                   bool dry_run);

}  // namespace sv
