#include "clu/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "clu/errors.hpp"

// Layout (all integers little-endian; doubles IEEE-754 binary64):
//   magic            8 bytes "CLUWCKPT"
//   version          u32
//   seed             u64
//   next_task        u32
//   method_seconds   f64
//   params           u64 count, f64[count]
//   buffer           capacity u64, seen u64, recount u8, rng u64[4],
//                    items u64 count { id i64, label i32, feat u64 len, f64[len] },
//                    tombstones u64 count, i64[count]
//   class_accuracy   u32 rows, u32 cols, f64[rows*cols] row-major
//   targets          u32 count { per_sample u8,
//                    acc u64 n + f64[n], ever u64 n + u8[n], mia u64 n + f64[n] }

namespace clu {

namespace {

constexpr char kMagic[8] = {'C', 'L', 'U', 'W', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ValidationError("checkpoint: truncated file");
    return v;
}

void write_doubles(std::ostream& out, const double* data, std::uint64_t n) {
    write_pod(out, n);
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

std::vector<double> read_doubles(std::istream& in) {
    const auto n = read_pod<std::uint64_t>(in);
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw ValidationError("checkpoint: truncated file");
    return v;
}

}  // namespace

void save_checkpoint(const RunState& state, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("checkpoint: cannot open " + path + " for writing");
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kVersion);
    write_pod(out, state.seed);
    write_pod(out, state.next_task);
    write_pod(out, state.method_seconds);
    write_doubles(out, state.params.data(), static_cast<std::uint64_t>(state.params.size()));

    const auto& buf = state.buffer;
    write_pod(out, static_cast<std::uint64_t>(buf.capacity));
    write_pod(out, buf.seen);
    write_pod(out, static_cast<std::uint8_t>(buf.recount ? 1 : 0));
    for (std::uint64_t word : buf.rng_state) write_pod(out, word);
    write_pod(out, static_cast<std::uint64_t>(buf.items.size()));
    for (const auto& item : buf.items) {
        write_pod(out, static_cast<std::int64_t>(item.id));
        write_pod(out, static_cast<std::int32_t>(item.label));
        write_doubles(out, item.features.data(), static_cast<std::uint64_t>(item.features.size()));
    }
    write_pod(out, static_cast<std::uint64_t>(buf.tombstones.size()));
    for (std::int64_t id : buf.tombstones) write_pod(out, id);

    const std::uint32_t rows = static_cast<std::uint32_t>(state.class_accuracy.size());
    const std::uint32_t cols = rows ? static_cast<std::uint32_t>(state.class_accuracy.front().size()) : 0;
    write_pod(out, rows);
    write_pod(out, cols);
    for (const auto& row : state.class_accuracy)
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(cols * sizeof(double)));

    write_pod(out, static_cast<std::uint32_t>(state.targets.size()));
    for (const TargetState& t : state.targets) {
        write_pod(out, static_cast<std::uint8_t>(t.per_sample ? 1 : 0));
        write_doubles(out, t.acc_history.data(), static_cast<std::uint64_t>(t.acc_history.size()));
        write_pod(out, static_cast<std::uint64_t>(t.ever_hit.size()));
        out.write(reinterpret_cast<const char*>(t.ever_hit.data()),
                  static_cast<std::streamsize>(t.ever_hit.size()));
        write_doubles(out, t.mia_history.data(), static_cast<std::uint64_t>(t.mia_history.size()));
    }
    if (!out) throw ValidationError("checkpoint: write failed for " + path);
}

RunState load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ValidationError("checkpoint: bad magic in " + path);
    const auto version = read_pod<std::uint32_t>(in);
    if (version != kVersion)
        throw ValidationError("checkpoint: unsupported version " + std::to_string(version));

    RunState state;
    state.seed = read_pod<std::uint64_t>(in);
    state.next_task = read_pod<std::uint32_t>(in);
    state.method_seconds = read_pod<double>(in);
    {
        const std::vector<double> p = read_doubles(in);
        state.params = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
    }

    state.buffer.capacity = static_cast<std::size_t>(read_pod<std::uint64_t>(in));
    state.buffer.seen = read_pod<std::uint64_t>(in);
    state.buffer.recount = read_pod<std::uint8_t>(in) != 0;
    for (auto& word : state.buffer.rng_state) word = read_pod<std::uint64_t>(in);
    const auto n_items = read_pod<std::uint64_t>(in);
    state.buffer.items.resize(n_items);
    for (auto& item : state.buffer.items) {
        item.id = read_pod<std::int64_t>(in);
        item.label = static_cast<int>(read_pod<std::int32_t>(in));
        const std::vector<double> f = read_doubles(in);
        item.features = Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
    }
    const auto n_tomb = read_pod<std::uint64_t>(in);
    state.buffer.tombstones.resize(n_tomb);
    for (auto& id : state.buffer.tombstones) id = read_pod<std::int64_t>(in);

    const auto rows = read_pod<std::uint32_t>(in);
    const auto cols = read_pod<std::uint32_t>(in);
    state.class_accuracy.assign(rows, std::vector<double>(cols));
    for (auto& row : state.class_accuracy) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(cols * sizeof(double)));
        if (!in) throw ValidationError("checkpoint: truncated accuracy history");
    }

    const auto n_targets = read_pod<std::uint32_t>(in);
    state.targets.resize(n_targets);
    for (auto& t : state.targets) {
        t.per_sample = read_pod<std::uint8_t>(in) != 0;
        t.acc_history = read_doubles(in);
        const auto n_hit = read_pod<std::uint64_t>(in);
        t.ever_hit.resize(n_hit);
        in.read(reinterpret_cast<char*>(t.ever_hit.data()), static_cast<std::streamsize>(n_hit));
        if (!in) throw ValidationError("checkpoint: truncated target state");
        t.mia_history = read_doubles(in);
    }
    return state;
}

}  // namespace clu
