#include "sv/transport.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>

#include "sv/error.hpp"

// httplib is pulled in only for live/record mode posts.
#define CPPHTTPLIB_OPENSSL_SUPPORT_DISABLED
#include <httplib.h>

namespace sv {

using nlohmann::json;

std::string base64_encode(const std::vector<uint8_t>& bytes) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back(alphabet[v & 63]);
    }
    if (i + 1 == bytes.size()) {
        const uint32_t v = bytes[i] << 16;
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == bytes.size()) {
        const uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::string png_base64(const Image& image) { return base64_encode(encode_png(image)); }

std::string chat_request_json(const ChatRequest& request) {
    json doc;
    doc["model"] = request.model;
    doc["temperature"] = request.temperature;
    doc["messages"] = json::array();
    for (const ChatMessage& message : request.messages)
        doc["messages"].push_back({{"role", message.role},
                                   {"text", message.text},
                                   {"images", message.images_b64}});
    return doc.dump();
}

std::string chat_request_hash(const ChatRequest& request) {
    // FNV-1a 64 over the canonical body.
    const std::string body = chat_request_json(request);
    uint64_t h = 0xCBF29CE484222325ull;
    for (const unsigned char c : body) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

EndpointConfig EndpointConfig::from_env(const std::string& prefix) {
    EndpointConfig config;
    if (const char* url = std::getenv((prefix + "_API_URL").c_str())) config.url = url;
    if (const char* key = std::getenv((prefix + "_API_KEY").c_str())) config.api_key = key;
    if (const char* model = std::getenv((prefix + "_MODEL").c_str())) config.model = model;
    config.mode = Mode::live;
    return config;
}

Cassette Cassette::load(const std::filesystem::path& path) {
    Cassette cassette;
    std::ifstream in(path);
    if (!in) return cassette;  // an absent cassette is just empty
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, "cassette " + path.string() + ": " + e.what());
    }
    for (const json& entry : doc) {
        Entry parsed;
        parsed.hash = entry.at("hash").get<std::string>();
        parsed.request_json = entry.value("request", "");
        parsed.response_text = entry.at("response").get<std::string>();
        cassette.entries_.push_back(std::move(parsed));
    }
    return cassette;
}

void Cassette::save(const std::filesystem::path& path) const {
    json doc = json::array();
    for (const Entry& entry : entries_)
        doc.push_back({{"hash", entry.hash},
                       {"request", entry.request_json},
                       {"response", entry.response_text}});
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write cassette " + path.string());
    out << doc.dump(2) << "\n";
}

void Cassette::record(const ChatRequest& request, const std::string& response_text) {
    entries_.push_back({chat_request_hash(request), chat_request_json(request), response_text});
}

std::optional<std::string> Cassette::replay(const ChatRequest& request) {
    const std::string hash = chat_request_hash(request);
    size_t& cursor = cursors_[hash];
    size_t seen = 0;
    for (const Entry& entry : entries_) {
        if (entry.hash != hash) continue;
        if (seen++ == cursor) {
            ++cursor;
            return entry.response_text;
        }
    }
    return std::nullopt;
}

ChatClient::ChatClient(EndpointConfig config) : config_(std::move(config)) {
    if (!config_.cassette_path.empty()) cassette_ = Cassette::load(config_.cassette_path);
}

ChatClient::~ChatClient() {
    if (cassette_dirty_ && !config_.cassette_path.empty()) {
        try {
            cassette_.save(config_.cassette_path);
        } catch (...) {
            // destructor must not throw; a failed cassette flush loses only the recording
        }
    }
}

std::string ChatClient::complete(const ChatRequest& request) {
    if (config_.mode == EndpointConfig::Mode::replay) {
        if (auto response = cassette_.replay(request)) return *response;
        throw Error(ErrorCode::TransportError,
                    "replay mode: no cassette entry for request " + chat_request_hash(request));
    }
    const std::string response = post_live(request);
    if (config_.mode == EndpointConfig::Mode::record) {
        cassette_.record(request, response);
        cassette_dirty_ = true;
    }
    return response;
}

std::string ChatClient::post_live(const ChatRequest& request) {
    if (config_.url.empty())
        throw Error(ErrorCode::TransportError, "no endpoint URL configured");
    if (config_.api_key.empty())
        throw Error(ErrorCode::AuthError, "no API key configured");

    // Split scheme://host[:port] from the path.
    std::string base = config_.url;
    std::string path = "/";
    const size_t scheme = base.find("://");
    if (scheme != std::string::npos) {
        const size_t slash = base.find('/', scheme + 3);
        if (slash != std::string::npos) {
            path = base.substr(slash);
            base = base.substr(0, slash);
        }
    }

    httplib::Client client(base);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);
    httplib::Headers headers = {{"Authorization", "Bearer " + config_.api_key}};

    const auto result = client.Post(path, headers, chat_request_json(request), "application/json");
    if (!result)
        throw Error(ErrorCode::TransportError,
                    "request failed: " + httplib::to_string(result.error()));
    if (result->status == 401 || result->status == 403)
        throw Error(ErrorCode::AuthError, "endpoint rejected credentials (status " +
                                              std::to_string(result->status) + ")");
    if (result->status != 200)
        throw Error(ErrorCode::TransportError,
                    "endpoint returned status " + std::to_string(result->status));

    try {
        const json doc = json::parse(result->body);
        return doc.at("text").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("endpoint response: ") + e.what());
    }
}

}  // namespace sv
