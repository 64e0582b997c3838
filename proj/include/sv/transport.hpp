#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sv/image.hpp"

namespace sv {

/// One multimodal chat message. Images travel as base64 PNG.
struct ChatMessage {
    std::string role;  // "system" | "user"
    std::string text;
    std::vector<std::string> images_b64;
};

struct ChatRequest {
    std::string model;
    double temperature = 1.0;
    std::vector<ChatMessage> messages;
};

/// Canonical JSON body of a request; also the cassette hash input.
std::string chat_request_json(const ChatRequest& request);
std::string chat_request_hash(const ChatRequest& request);

std::string base64_encode(const std::vector<uint8_t>& bytes);
std::string png_base64(const Image& image);

struct EndpointConfig {
    std::string url;
    std::string api_key;
    std::string model;
    double temperature = 1.0;
    /// replay: cassette only, network forbidden. record: live, append to
    /// cassette. live: network only.
    enum class Mode { replay, record, live } mode = Mode::replay;
    std::filesystem::path cassette_path;
    int retry_cap = 3;

    /// Reads <PREFIX>_API_URL / <PREFIX>_API_KEY / <PREFIX>_MODEL.
    static EndpointConfig from_env(const std::string& prefix);
};

/// Request/response recorder. Entries are keyed by request hash; repeated
/// identical requests consume recorded responses in order, which is how a
/// malformed-then-valid retry session replays deterministically.
class Cassette {
public:
    Cassette() = default;

    static Cassette load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    void record(const ChatRequest& request, const std::string& response_text);
    /// Next recorded response for this request, if any; advances the cursor.
    std::optional<std::string> replay(const ChatRequest& request);

    size_t size() const { return entries_.size(); }

private:
    struct Entry {
        std::string hash;
        std::string request_json;
        std::string response_text;
    };
    std::vector<Entry> entries_;
    std::map<std::string, size_t> cursors_;  // per-hash replay position
};

/// POSTs {model, temperature, messages:[{role, text, images[]}]} and returns
/// the response's "text" field. Replay mode never touches the network.
/// Throws TransportError / AuthError.
class ChatClient {
public:
    explicit ChatClient(EndpointConfig config);
    ~ChatClient();

    std::string complete(const ChatRequest& request);

    const EndpointConfig& config() const { return config_; }

private:
    std::string post_live(const ChatRequest& request);

    EndpointConfig config_;
    Cassette cassette_;
    bool cassette_dirty_ = false;
};

}  // namespace sv
