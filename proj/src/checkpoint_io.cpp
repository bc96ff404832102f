#include "dsoup/checkpoint_io.hpp"

#include <fstream>
#include <unistd.h>

#include "dsoup/errors.hpp"
#include "dsoup/sha256.hpp"

namespace dsoup {

namespace {

constexpr char kMagic[6] = {'D', 'S', 'O', 'U', 'P', '1'};

void atomic_write(const std::string& bytes, const std::filesystem::path& path) {
    std::filesystem::path tmp = path;
    tmp += ".tmp-" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(bytes.data(), std::streamsize(bytes.size()));
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                      ec.message());
    }
}

}  // namespace

std::string save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path) {
    if (cp.weights.size() != cp.arch.param_count())
        throw ValidationError("checkpoint has " + std::to_string(cp.weights.size()) +
                              " weights but the architecture expects " +
                              std::to_string(cp.arch.param_count()));
    std::string payload;
    payload.reserve(cp.weights.size() * 8);
    unsigned char buf[8];
    for (double v : cp.weights) {
        le_double_bytes(v, buf);
        payload.append(reinterpret_cast<const char*>(buf), 8);
    }
    nlohmann::json header = {{"ancestor_hash", cp.ancestor_hash},
                             {"arch", cp.arch.to_json()},
                             {"payload_hash", sha256_hex(payload)},
                             {"provenance", cp.provenance},
                             {"schedule", cp.schedule.to_json()},
                             {"weight_count", cp.weights.size()}};
    std::string head = header.dump();
    if (head.size() > 0xFFFFFFFFull) throw ValidationError("header too large");

    std::string bytes;
    bytes.reserve(6 + 4 + head.size() + payload.size());
    bytes.append(kMagic, 6);
    std::uint32_t len = std::uint32_t(head.size());
    for (int i = 0; i < 4; ++i) bytes.push_back(char((len >> (8 * i)) & 0xFF));
    bytes += head;
    bytes += payload;

    atomic_write(bytes, path);
    return sha256_hex(bytes);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    char magic[6];
    if (!in.read(magic, 6) || std::string_view(magic, 6) != std::string_view(kMagic, 6))
        throw FormatError("bad magic in " + path.string());
    unsigned char lenb[4];
    if (!in.read(reinterpret_cast<char*>(lenb), 4))
        throw FormatError("truncated header length in " + path.string());
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len |= std::uint32_t(lenb[i]) << (8 * i);
    if (len == 0 || len > (16u << 20))
        throw FormatError("implausible header length in " + path.string());

    std::string head(len, '\0');
    if (!in.read(head.data(), len)) throw FormatError("truncated header in " + path.string());

    Checkpoint cp;
    std::uint64_t count = 0;
    std::string payload_hash;
    try {
        nlohmann::json h = nlohmann::json::parse(head);
        cp.arch = ArchDescriptor::from_json(h.at("arch"));
        cp.schedule = NoiseSchedule::from_json(h.at("schedule"));
        cp.ancestor_hash = h.at("ancestor_hash").get<std::string>();
        cp.provenance = h.at("provenance");
        count = h.at("weight_count").get<std::uint64_t>();
        payload_hash = h.at("payload_hash").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad header in " + path.string() + ": " + e.what());
    }
    if (count != cp.arch.param_count())
        throw FormatError("weight count " + std::to_string(count) + " does not match arch (" +
                          std::to_string(cp.arch.param_count()) + ") in " + path.string());

    std::string payload(count * 8, '\0');
    if (!in.read(payload.data(), std::streamsize(payload.size())))
        throw FormatError("truncated payload in " + path.string());
    if (in.peek() != std::char_traits<char>::eof())
        throw FormatError("trailing bytes in " + path.string());
    if (sha256_hex(payload) != payload_hash)
        throw IntegrityError("payload hash mismatch in " + path.string());

    cp.weights.resize(count);
    for (std::uint64_t i = 0; i < count; ++i)
        cp.weights[i] =
            double_from_le(reinterpret_cast<const unsigned char*>(payload.data()) + i * 8);
    return cp;
}

void save_json(const nlohmann::json& j, const std::filesystem::path& path) {
    atomic_write(j.dump(2) + "\n", path);
}

nlohmann::json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad json in " + path.string() + ": " + e.what());
    }
}

}  // namespace dsoup
