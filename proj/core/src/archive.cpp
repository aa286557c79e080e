#include "uabs/archive.hpp"

#include <cstring>
#include <fstream>
#include <span>
#include <vector>

#include "binio.hpp"

namespace uabs {

namespace {

constexpr char kMagic[8] = {'U', 'A', 'B', 'S', 'A', 'R', 'C', '\0'};
constexpr std::uint32_t kVersion = 1;

void write_episode(binio::Writer& w, const Episode& e) {
    w.u32(static_cast<std::uint32_t>(e.steps.size()));
    w.u32(e.steps.empty() ? 0 : static_cast<std::uint32_t>(e.steps.front().features.size()));
    for (const StepRecord& rec : e.steps) {
        for (const double f : rec.features) w.f64(f);
        w.u8(static_cast<std::uint8_t>(rec.action));
        w.i32(rec.reward);
        w.f64(rec.behavior_prob);
    }
}

Episode read_episode(binio::Reader& r) {
    Episode e;
    const std::uint32_t n_steps = r.u32();
    const std::uint32_t feat_dim = r.u32();
    e.steps.resize(n_steps);
    for (StepRecord& rec : e.steps) {
        rec.features.resize(feat_dim);
        for (double& f : rec.features) f = r.f64();
        rec.action = static_cast<Action>(r.u8());
        rec.reward = r.i32();
        rec.behavior_prob = r.f64();
        e.total_reward += rec.reward;
    }
    return e;
}

}  // namespace

void save_archive(const MetaState& state, const std::filesystem::path& path) {
    binio::Writer w;
    w.u32(static_cast<std::uint32_t>(state.theta0.arch.input_dim));
    w.u32(static_cast<std::uint32_t>(state.theta0.arch.hidden.size()));
    for (const int h : state.theta0.arch.hidden) w.u32(static_cast<std::uint32_t>(h));
    w.u32(static_cast<std::uint32_t>(state.theta0.arch.output_dim));
    w.u64(state.theta0.theta.size());
    for (const double v : state.theta0.theta) w.f64(v);

    w.u32(static_cast<std::uint32_t>(state.archive.size()));
    for (const TaskArchiveEntry& entry : state.archive) {
        w.i32(entry.task_index);
        w.u64(entry.skilled_index);
        w.u32(static_cast<std::uint32_t>(entry.full_set.size()));
        for (const Episode& e : entry.full_set) write_episode(w, e);
    }

    const auto& payload = w.bytes();
    binio::Writer header;
    header.u32(kVersion);
    header.u64(payload.size());
    binio::Writer footer;
    footer.u32(binio::crc32(payload));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_archive: cannot open " + path.string());
    out.write(kMagic, sizeof(kMagic));
    out.write(header.bytes().data(), static_cast<std::streamsize>(header.bytes().size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    out.write(footer.bytes().data(), static_cast<std::streamsize>(footer.bytes().size()));
    if (!out) throw std::runtime_error("save_archive: write failed for " + path.string());
}

MetaState load_archive(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_archive: cannot open " + path.string());
    std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    constexpr std::size_t kHeaderSize = sizeof(kMagic) + 4 + 8;
    if (data.size() < kHeaderSize ||
        std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) {
        throw ArchiveError(ArchiveError::Kind::format,
                           "load_archive: not an experience archive: " + path.string());
    }
    binio::Reader header(std::span<const char>(data).subspan(sizeof(kMagic), 12));
    const std::uint32_t version = header.u32();
    if (version != kVersion) {
        throw ArchiveError(ArchiveError::Kind::version,
                           "load_archive: unsupported archive version " + std::to_string(version));
    }
    const std::uint64_t payload_len = header.u64();
    if (data.size() != kHeaderSize + payload_len + 4) {
        throw ArchiveError(ArchiveError::Kind::truncated,
                           "load_archive: truncated archive: " + path.string());
    }
    const auto payload = std::span<const char>(data).subspan(kHeaderSize, payload_len);
    binio::Reader footer(std::span<const char>(data).subspan(kHeaderSize + payload_len, 4));
    if (binio::crc32(payload) != footer.u32()) {
        throw ArchiveError(ArchiveError::Kind::checksum,
                           "load_archive: checksum mismatch: " + path.string());
    }

    try {
        binio::Reader r(payload);
        MetaState state;
        state.theta0.arch.input_dim = static_cast<int>(r.u32());
        state.theta0.arch.hidden.resize(r.u32());
        for (int& h : state.theta0.arch.hidden) h = static_cast<int>(r.u32());
        state.theta0.arch.output_dim = static_cast<int>(r.u32());
        state.theta0.theta.resize(r.u64());
        for (double& v : state.theta0.theta) v = r.f64();

        state.archive.resize(r.u32());
        for (TaskArchiveEntry& entry : state.archive) {
            entry.task_index = r.i32();
            entry.skilled_index = r.u64();
            entry.full_set.resize(r.u32());
            for (Episode& e : entry.full_set) e = read_episode(r);
            if (!entry.full_set.empty() && entry.skilled_index >= entry.full_set.size()) {
                throw ArchiveError(ArchiveError::Kind::format,
                                   "load_archive: skilled index out of range");
            }
        }
        if (!r.exhausted()) {
            throw ArchiveError(ArchiveError::Kind::format,
                               "load_archive: trailing bytes in payload");
        }
        return state;
    } catch (const std::out_of_range&) {
        throw ArchiveError(ArchiveError::Kind::format,
                           "load_archive: payload ends early: " + path.string());
    }
}

}  // namespace uabs
