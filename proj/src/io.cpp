#include "radnet/io.hpp"

#include "radnet/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace radnet {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

constexpr char kMagic[8] = {'R', 'A', 'D', 'N', 'E', 'T', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw IoError("cannot read " + path.string());
    return in;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> tokens(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

template <typename T>
T parse_number(std::string_view s, const std::string& where) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw InvalidInput(where + ": cannot parse '" + std::string(s) + "'");
    }
    return v;
}

std::string feature_file(Modality m) { return std::string(to_string(m)) + ".txt"; }

} // namespace

void save_dataset(const fs::path& dir, const Dataset& data) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    json manifest;
    manifest["format"] = 1;
    manifest["tracks"] = data.tracks.size();
    for (Modality m : kModalities) {
        manifest["dims"][std::string(to_string(m))] = data.dims[index_of(m)];
        manifest["clues"][std::string(to_string(m))] = data.clue_count(m);
    }
    {
        auto out = open_out(dir / "manifest.json");
        out << manifest.dump(2) << '\n';
        finish(out, dir / "manifest.json");
    }
    for (Modality m : kModalities) {
        const fs::path path = dir / feature_file(m);
        if (data.dims[index_of(m)] == 0) {
            fs::remove(path, ec);
            continue;
        }
        auto out = open_out(path);
        for (const auto& t : data.tracks) {
            for (const auto& c : t.of(m)) {
                out << c.clue_id << ' ' << c.track_id << ' ' << c.identity.value_or(-1);
                for (Eigen::Index k = 0; k < c.feature.size(); ++k) out << ' ' << format_double(c.feature(k));
                out << '\n';
            }
        }
        finish(out, path);
    }
    auto out = open_out(dir / "tracks.csv");
    out << "track_id,identity,n_face,n_body,n_voice\n";
    for (const auto& t : data.tracks) {
        out << t.track_id << ',' << t.identity().value_or(-1);
        for (Modality m : kModalities) out << ',' << t.of(m).size();
        out << '\n';
    }
    finish(out, dir / "tracks.csv");
}

Dataset load_dataset(const fs::path& dir) {
    json manifest;
    {
        auto in = open_in(dir / "manifest.json");
        try {
            in >> manifest;
        } catch (const json::exception& e) {
            throw InvalidInput("manifest.json: " + std::string(e.what()));
        }
    }
    Dataset data;
    try {
        for (Modality m : kModalities) {
            data.dims[index_of(m)] = manifest.at("dims").value(std::string(to_string(m)), 0);
            if (data.dims[index_of(m)] < 0) throw InvalidInput("manifest.json: negative dimension");
        }
    } catch (const json::exception& e) {
        throw InvalidInput("manifest.json: " + std::string(e.what()));
    }

    std::map<int, std::array<std::size_t, kModalityCount>> expected;
    {
        auto in = open_in(dir / "tracks.csv");
        std::string line;
        if (!std::getline(in, line) || line.rfind("track_id,", 0) != 0) {
            throw InvalidInput("tracks.csv: missing header");
        }
        int lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            const auto cells = split(line, ',');
            const std::string where = "tracks.csv:" + std::to_string(lineno);
            if (cells.size() != 5) throw InvalidInput(where + ": expected 5 columns");
            const int id = parse_number<int>(cells[0], where);
            std::array<std::size_t, kModalityCount> counts{};
            for (std::size_t m = 0; m < kModalityCount; ++m) counts[m] = parse_number<std::size_t>(cells[2 + m], where);
            if (!expected.emplace(id, counts).second) throw InvalidInput(where + ": duplicate track " + std::to_string(id));
        }
    }

    std::map<int, Track> tracks;
    for (const auto& [id, counts] : expected) tracks[id].track_id = id;
    std::set<int> clue_ids;
    for (Modality m : kModalities) {
        const int dim = data.dims[index_of(m)];
        const fs::path path = dir / feature_file(m);
        if (dim == 0) continue;
        auto in = open_in(path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto tok = tokens(line);
            if (tok.empty()) continue;
            const std::string where = feature_file(m) + ":" + std::to_string(lineno);
            if (tok.size() != static_cast<std::size_t>(dim) + 3) {
                throw InvalidInput(where + ": expected " + std::to_string(dim) + " feature values");
            }
            Clue c;
            c.clue_id = parse_number<int>(tok[0], where);
            c.track_id = parse_number<int>(tok[1], where);
            c.modality = m;
            const int identity = parse_number<int>(tok[2], where);
            if (identity >= 0) c.identity = identity;
            c.feature.resize(dim);
            for (int k = 0; k < dim; ++k) {
                c.feature(k) = parse_number<double>(tok[3 + static_cast<std::size_t>(k)], where);
                if (!std::isfinite(c.feature(k))) throw InvalidInput(where + ": non-finite feature value");
            }
            if (!clue_ids.insert(c.clue_id).second) {
                throw InvalidInput(where + ": duplicate clue id " + std::to_string(c.clue_id));
            }
            auto it = tracks.find(c.track_id);
            if (it == tracks.end()) {
                throw InvalidInput(where + ": clue refers to unknown track " + std::to_string(c.track_id));
            }
            it->second.of(m).push_back(std::move(c));
        }
    }

    for (auto& [id, track] : tracks) {
        for (Modality m : kModalities) {
            if (track.of(m).size() != expected[id][index_of(m)]) {
                throw InvalidInput("track " + std::to_string(id) + ": " + std::string(to_string(m)) +
                                   " clue count disagrees with tracks.csv");
            }
        }
        track.validate();
        data.tracks.push_back(std::move(track));
    }
    if (data.tracks.empty()) throw InvalidInput("dataset " + dir.string() + " has no tracks");
    return data;
}

// ---------------------------------------------------------------------------

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int k = 0; k < 4; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw InvalidInput("checkpoint truncated");
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[k]) << (8 * k);
    return v;
}

double get_f64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw InvalidInput("checkpoint truncated");
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    return std::bit_cast<double>(v);
}

json shape_json(const ModelShape& s) {
    return {{"width", s.width},
            {"hidden", s.hidden},
            {"cycles", s.cycles},
            {"dims", s.dims},
            {"mode", std::string(to_string(s.mode))}};
}

ModelShape shape_from(const json& j) {
    ModelShape s;
    s.width = j.at("width").get<int>();
    s.hidden = j.at("hidden").get<int>();
    s.cycles = j.at("cycles").get<int>();
    s.dims = j.at("dims").get<std::array<int, kModalityCount>>();
    s.mode = parse_mode(j.at("mode").get<std::string>());
    return s;
}

} // namespace

void save_checkpoint(const fs::path& path, const Checkpoint& ck) {
    Model model = ck.model;
    const std::string header = json{{"shape", shape_json(model.shape)}, {"config", ck.config}}.dump();
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out.write(kMagic, sizeof kMagic);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(header.size()));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    const auto tensors = model.tensors();
    put_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        put_u32(out, static_cast<std::uint32_t>(t.name.size()));
        out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        put_u32(out, static_cast<std::uint32_t>(t.rows));
        put_u32(out, static_cast<std::uint32_t>(t.cols));
        for (double v : t.data) put_f64(out, v);
    }
    finish(out, path);
}

Checkpoint load_checkpoint(const fs::path& path) {
    auto in = open_in(path, std::ios::in | std::ios::binary);
    char magic[sizeof kMagic];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw InvalidInput(path.string() + " is not a model checkpoint");
    }
    const auto version = get_u32(in);
    if (version != kVersion) throw InvalidInput("unsupported checkpoint version " + std::to_string(version));
    const auto header_len = get_u32(in);
    std::string header(header_len, '\0');
    if (!in.read(header.data(), header_len)) throw InvalidInput("checkpoint truncated");

    Checkpoint ck;
    try {
        const json h = json::parse(header);
        ck.model = Model::zeros(shape_from(h.at("shape")));
        from_json(h.at("config"), ck.config);
    } catch (const json::exception& e) {
        throw InvalidInput("checkpoint header: " + std::string(e.what()));
    }

    auto tensors = ck.model.tensors();
    const auto count = get_u32(in);
    if (count != tensors.size()) throw InvalidInput("checkpoint tensor count does not match its model shape");
    for (auto& t : tensors) {
        const auto name_len = get_u32(in);
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len)) throw InvalidInput("checkpoint truncated");
        const auto rows = get_u32(in);
        const auto cols = get_u32(in);
        if (name != t.name || rows != t.rows || cols != t.cols) {
            throw InvalidInput("checkpoint tensor " + name + " does not match expected " + t.name);
        }
        for (double& v : t.data) {
            v = get_f64(in);
            if (!std::isfinite(v)) throw InvalidInput("checkpoint tensor " + name + " holds a non-finite value");
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) throw InvalidInput("trailing bytes in checkpoint");
    return ck;
}

// ---------------------------------------------------------------------------

void write_training_log(const fs::path& path, const std::vector<LogRow>& rows) {
    auto out = open_out(path);
    out << "iteration,loss,loss_f,loss_d,lr\n";
    for (const auto& r : rows) {
        out << r.iteration << ',' << format_double(r.loss.total) << ',' << format_double(r.loss.feature) << ','
            << format_double(r.loss.distribution) << ',' << format_double(r.lr) << '\n';
    }
    finish(out, path);
}

void write_assignment(const fs::path& path, const ClusterAssignment& a) {
    auto out = open_out(path);
    out << "track_id,cluster_id\n";
    for (const auto& [track, cluster] : a.cluster_of) out << track << ',' << cluster << '\n';
    finish(out, path);
}

ClusterAssignment read_assignment(const fs::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("track_id,cluster_id", 0) != 0) {
        throw InvalidInput(path.string() + ": missing header");
    }
    ClusterAssignment a;
    std::set<int> clusters;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(lineno);
        const auto cells = split(line, ',');
        if (cells.size() != 2) throw InvalidInput(where + ": expected 2 columns");
        const int track = parse_number<int>(cells[0], where);
        const int cluster = parse_number<int>(cells[1], where);
        if (!a.cluster_of.emplace(track, cluster).second) throw InvalidInput(where + ": duplicate track");
        clusters.insert(cluster);
    }
    a.cluster_count = static_cast<int>(clusters.size());
    return a;
}

void write_metrics(const fs::path& path, const MetricReport& r) {
    auto out = open_out(path);
    out << "metric,value\n"
        << "wcp," << format_double(r.wcp) << '\n'
        << "nmi," << format_double(r.nmi) << '\n'
        << "cp," << format_double(r.cp) << '\n'
        << "cr," << format_double(r.cr) << '\n'
        << "cf," << format_double(r.cf) << '\n';
    finish(out, path);
}

void write_sweep(const fs::path& path, const std::vector<SweepRow>& rows) {
    auto out = open_out(path);
    out << "threshold,clusters,wcp,nmi,cp,cr,cf\n";
    for (const auto& r : rows) {
        out << format_double(r.threshold) << ',' << r.clusters << ',' << format_double(r.metrics.wcp) << ','
            << format_double(r.metrics.nmi) << ',' << format_double(r.metrics.cp) << ','
            << format_double(r.metrics.cr) << ',' << format_double(r.metrics.cf) << '\n';
    }
    finish(out, path);
}

} // namespace radnet
