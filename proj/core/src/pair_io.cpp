#include "dbmatch/pair_io.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <vector>

#include "dbmatch/errors.hpp"

namespace dbmatch {

namespace {

constexpr std::array<char, 4> kMagic = {'D', 'B', 'M', 'P'};
constexpr std::uint32_t kFormatVersion = 1;

std::uint32_t crc_table_entry(std::uint32_t i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) {
        c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    }
    return c;
}

const std::array<std::uint32_t, 256>& crc_table() {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) t[i] = crc_table_entry(i);
        return t;
    }();
    return table;
}

// Serializer that appends little-endian fields to a byte buffer.
struct Writer {
    std::vector<std::uint8_t> bytes;

    void raw(const void* p, std::size_t size) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        bytes.insert(bytes.end(), b, b + size);
    }
    void u32(std::uint32_t v) {
        std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                             static_cast<std::uint8_t>(v >> 16),
                             static_cast<std::uint8_t>(v >> 24)};
        raw(b, 4);
    }
    void u64(std::uint64_t v) {
        u32(static_cast<std::uint32_t>(v));
        u32(static_cast<std::uint32_t>(v >> 32));
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
};

struct Reader {
    const std::uint8_t* p;
    std::size_t remaining;

    void need(std::size_t size) {
        if (remaining < size) {
            throw PairFormatError(PairFormatError::Kind::truncated,
                                  "pair file truncated: needed " + std::to_string(size) +
                                      " more bytes, have " + std::to_string(remaining));
        }
    }
    void raw(void* out, std::size_t size) {
        need(size);
        std::memcpy(out, p, size);
        p += size;
        remaining -= size;
    }
    std::uint32_t u32() {
        std::uint8_t b[4];
        raw(b, 4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }
    std::uint64_t u64() {
        std::uint64_t lo = u32();
        std::uint64_t hi = u32();
        return lo | (hi << 32);
    }
    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open pair file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (!in.good() && !in.eof()) throw IoError("failed reading pair file: " + path);
    return bytes;
}

struct ParsedHeader {
    Reader body;
    JointProcessSpec spec;
    bool discrete;
    std::size_t m;
    std::size_t n;
    std::uint64_t seed;
};

ParsedHeader parse_header(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4 + 4 + 4) {
        throw PairFormatError(PairFormatError::Kind::truncated, "pair file shorter than header");
    }
    // Verify the trailing checksum before trusting anything else.
    std::size_t payload_size = bytes.size() - 4;
    std::uint32_t stored_crc;
    std::memcpy(&stored_crc, bytes.data() + payload_size, 4);
    std::uint32_t computed = crc32_ieee(bytes.data(), payload_size);
    if (stored_crc != computed) {
        throw PairFormatError(PairFormatError::Kind::checksum_mismatch,
                              "pair file checksum mismatch (corrupt or incomplete file)");
    }

    Reader r{bytes.data(), payload_size};
    std::array<char, 4> magic;
    r.raw(magic.data(), 4);
    if (magic != kMagic) {
        throw PairFormatError(PairFormatError::Kind::bad_magic, "not a DBMP pair file");
    }
    std::uint32_t version = r.u32();
    if (version != kFormatVersion) {
        throw PairFormatError(PairFormatError::Kind::version_mismatch,
                              "unsupported pair file version " + std::to_string(version) +
                                  " (supported: " + std::to_string(kFormatVersion) + ")");
    }
    std::uint32_t kind = r.u32();
    if (kind > 1) {
        throw PairFormatError(PairFormatError::Kind::bad_payload,
                              "unknown scalar kind " + std::to_string(kind));
    }
    std::uint64_t spec_len = r.u64();
    r.need(spec_len);
    std::string spec_json(reinterpret_cast<const char*>(r.p), spec_len);
    r.p += spec_len;
    r.remaining -= spec_len;
    JointProcessSpec spec = parse_spec_json(spec_json);
    if (spec.is_discrete() != (kind == 0)) {
        throw PairFormatError(PairFormatError::Kind::bad_payload,
                              "scalar kind disagrees with the embedded spec variant");
    }
    std::uint64_t m = r.u64();
    std::uint64_t n = r.u64();
    std::uint64_t seed = r.u64();
    if (m == 0 || n == 0) {
        throw PairFormatError(PairFormatError::Kind::bad_payload, "pair file has m or n = 0");
    }
    return ParsedHeader{r, std::move(spec), kind == 0, static_cast<std::size_t>(m),
                        static_cast<std::size_t>(n), seed};
}

EntryStore read_entries(Reader& r, bool discrete, std::size_t n, std::size_t m) {
    EntryStore store(n, m, discrete);
    if (discrete) {
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& v : store.mutable_row_sym(i)) v = r.u32();
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& v : store.mutable_row_real(i)) v = r.f64();
        }
    }
    return store;
}

std::vector<std::uint32_t> read_theta(Reader& r, std::size_t n) {
    std::vector<std::uint32_t> theta(n);
    for (auto& v : theta) v = r.u32();
    check_permutation(theta, n);
    return theta;
}

}  // namespace

std::uint32_t crc32_ieee(const void* data, std::size_t size, std::uint32_t seed) {
    const auto& table = crc_table();
    const auto* p = static_cast<const std::uint8_t*>(data);
    std::uint32_t c = seed ^ 0xFFFFFFFFu;
    for (std::size_t i = 0; i < size; ++i) {
        c = table[(c ^ p[i]) & 0xFFu] ^ (c >> 8);
    }
    return c ^ 0xFFFFFFFFu;
}

void save_pair(const CorrelatedPair& pair, const std::string& path) {
    const auto& db1 = pair.db1;
    const auto& db2 = pair.db2;
    const bool discrete = db1.base.entries.discrete();

    Writer w;
    w.raw(kMagic.data(), 4);
    w.u32(kFormatVersion);
    w.u32(discrete ? 0u : 1u);
    const std::string& spec_json = pair.spec.json();
    w.u64(spec_json.size());
    w.raw(spec_json.data(), spec_json.size());
    w.u64(db1.base.m);
    w.u64(db1.base.n);
    w.u64(pair.seed);
    for (const auto* db : {&db1, &db2}) {
        if (discrete) {
            for (std::uint32_t v : db->base.entries.raw_sym()) w.u32(v);
        } else {
            for (double v : db->base.entries.raw_real()) w.f64(v);
        }
    }
    for (std::uint32_t v : db1.theta) w.u32(v);
    for (std::uint32_t v : db2.theta) w.u32(v);
    std::uint32_t crc = crc32_ieee(w.bytes.data(), w.bytes.size());
    w.u32(crc);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open pair file for writing: " + path);
    out.write(reinterpret_cast<const char*>(w.bytes.data()),
              static_cast<std::streamsize>(w.bytes.size()));
    if (!out.good()) throw IoError("failed writing pair file: " + path);
}

CorrelatedPair load_pair(const std::string& path) {
    std::vector<std::uint8_t> bytes = read_file(path);
    ParsedHeader h = parse_header(bytes);
    Reader& r = h.body;

    EntryStore e1 = read_entries(r, h.discrete, h.n, h.m);
    EntryStore e2 = read_entries(r, h.discrete, h.n, h.m);
    std::vector<std::uint32_t> theta1 = read_theta(r, h.n);
    std::vector<std::uint32_t> theta2 = read_theta(r, h.n);

    return CorrelatedPair{
        LabeledDatabase{UnlabeledDatabase{h.m, h.n, std::move(e1), h.spec.id()},
                        std::move(theta1)},
        LabeledDatabase{UnlabeledDatabase{h.m, h.n, std::move(e2), h.spec.id()},
                        std::move(theta2)},
        std::move(h.spec),
        h.seed,
    };
}

MatchingInstance load_matching_instance(const std::string& path) {
    std::vector<std::uint8_t> bytes = read_file(path);
    ParsedHeader h = parse_header(bytes);
    Reader& r = h.body;

    EntryStore e1 = read_entries(r, h.discrete, h.n, h.m);
    EntryStore e2 = read_entries(r, h.discrete, h.n, h.m);
    std::vector<std::uint32_t> theta1 = read_theta(r, h.n);
    // theta2 stays on disk: it was already covered by the checksum.

    return MatchingInstance{
        LabeledDatabase{UnlabeledDatabase{h.m, h.n, std::move(e1), h.spec.id()},
                        std::move(theta1)},
        UnlabeledDatabase{h.m, h.n, std::move(e2), h.spec.id()},
        std::move(h.spec),
    };
}

void export_pair_csv(const CorrelatedPair& pair, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open csv export for writing: " + path);
    out << "db,position,member";
    for (std::size_t t = 0; t < pair.db1.base.m; ++t) out << ",v" << t;
    out << "\n";

    char buf[64];
    auto write_real = [&](double v) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, end - buf);
    };
    for (int dbi = 1; dbi <= 2; ++dbi) {
        const LabeledDatabase& db = dbi == 1 ? pair.db1 : pair.db2;
        for (std::size_t i = 0; i < db.base.n; ++i) {
            out << dbi << ',' << i << ',' << db.theta[i];
            if (db.base.entries.discrete()) {
                for (std::uint32_t v : db.base.entries.row_sym(i)) out << ',' << v;
            } else {
                for (double v : db.base.entries.row_real(i)) {
                    out << ',';
                    write_real(v);
                }
            }
            out << "\n";
        }
    }
    if (!out.good()) throw IoError("failed writing csv export: " + path);
}

}  // namespace dbmatch
