#include "ncderp/encode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

#include "ncderp/error.hpp"
#include "ncderp/parallel.hpp"

namespace ncderp {

void validate(const ObjectConfig& cfg) {
    if (cfg.m_means < 1) throw Error("M (segments averaged) must be >= 1");
    if (cfg.c_concats < 1) throw Error("C (averages concatenated) must be >= 1");
    if (cfg.quant_levels < 2 || cfg.quant_levels > kMaxQuantLevels)
        throw Error("quant_levels must lie in [2, 94]");
    if (!(cfg.clip_sigma > 0.0) || !std::isfinite(cfg.clip_sigma)) throw Error("clip_sigma must be positive");
}

int quant_level(double v, const ObjectConfig& cfg) {
    if (!std::isfinite(v)) throw Error("cannot quantize a non-finite value");
    const double clipped = std::clamp(v, -cfg.clip_sigma, cfg.clip_sigma);
    const int level = static_cast<int>(std::floor((clipped + cfg.clip_sigma) / (2.0 * cfg.clip_sigma) *
                                                  cfg.quant_levels));
    return std::clamp(level, 0, cfg.quant_levels - 1);
}

std::string quantize(std::span<const double> values, const ObjectConfig& cfg) {
    std::string out(values.size(), '\0');
    for (std::size_t i = 0; i < values.size(); ++i)
        out[i] = static_cast<char>(kAlphabetOffset + quant_level(values[i], cfg));
    return out;
}

std::vector<AsciiObject> build_objects(const std::vector<Segment>& segments, const ObjectConfig& cfg,
                                       int per_class_count) {
    return build_multi_electrode_objects({segments}, cfg, per_class_count);
}

std::vector<AsciiObject> build_multi_electrode_objects(
    const std::vector<std::vector<Segment>>& per_electrode, const ObjectConfig& cfg, int per_class_count) {
    validate(cfg);
    if (per_class_count < 1) throw Error("per_class_count must be >= 1");
    if (per_electrode.empty() || per_electrode.front().empty()) throw Error("no segments to build objects from");
    const auto& ref = per_electrode.front();
    const std::size_t window = ref.front().values.size();
    for (const auto& elec : per_electrode) {
        if (elec.size() != ref.size()) throw Error("electrode segment lists are not aligned");
        for (std::size_t i = 0; i < elec.size(); ++i) {
            if (elec[i].values.size() != window) throw Error("segments differ in length");
            if (elec[i].origin != ref[i].origin || elec[i].label != ref[i].label)
                throw Error("electrode segment lists are not aligned by event");
        }
    }

    const std::size_t per_object = static_cast<std::size_t>(cfg.m_means) * cfg.c_concats;
    std::vector<AsciiObject> out;
    for (Label label : {Label::P300, Label::NonP300}) {
        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < ref.size(); ++i)
            if (ref[i].label == label) pool.push_back(i);
        const std::size_t required = per_object * static_cast<std::size_t>(per_class_count);
        if (pool.size() < required)
            throw Error("insufficient " + to_string(label) + " segments: required " + std::to_string(required) +
                        " (" + std::to_string(per_class_count) + " objects x M=" + std::to_string(cfg.m_means) +
                        " x C=" + std::to_string(cfg.c_concats) + "), available " + std::to_string(pool.size()));
        std::mt19937_64 rng(derive_seed(cfg.rng_seed, "objects", static_cast<std::uint64_t>(label)));
        std::shuffle(pool.begin(), pool.end(), rng);

        std::vector<double> avg(window);
        for (int k = 0; k < per_class_count; ++k) {
            AsciiObject obj;
            obj.label = label;
            const std::size_t base = static_cast<std::size_t>(k) * per_object;
            for (std::size_t i = 0; i < per_object; ++i) obj.provenance.push_back(ref[pool[base + i]].origin);
            for (int c = 0; c < cfg.c_concats; ++c) {
                const std::size_t group = base + static_cast<std::size_t>(c) * cfg.m_means;
                for (const auto& elec : per_electrode) {
                    std::fill(avg.begin(), avg.end(), 0.0);
                    for (int m = 0; m < cfg.m_means; ++m) {
                        const auto& v = elec[pool[group + m]].values;
                        for (std::size_t t = 0; t < window; ++t) avg[t] += v[t];
                    }
                    for (auto& a : avg) a /= cfg.m_means;
                    if (!obj.bytes.empty()) obj.bytes += kBlockSeparator;
                    obj.bytes += quantize(avg, cfg);
                }
            }
            out.push_back(std::move(obj));
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "o%02zu", i);
        out[i].id = buf;
    }
    return out;
}

void write_objects(const std::vector<AsciiObject>& objects, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest = nlohmann::json::array();
    for (const auto& obj : objects) {
        const std::string file = to_string(obj.label) + "_" + obj.id + ".obj";
        std::ofstream f(dir / file, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write " + (dir / file).string());
        f.write(obj.bytes.data(), static_cast<std::streamsize>(obj.bytes.size()));
        nlohmann::json prov = nlohmann::json::array();
        for (const auto& o : obj.provenance) prov.push_back({{"event", o.event_index}, {"recording", o.recording_id}});
        manifest.push_back({{"id", obj.id}, {"label", to_string(obj.label)}, {"file", file}, {"provenance", prov}});
    }
    std::ofstream m(dir / "manifest.json", std::ios::trunc);
    m << nlohmann::json{{"objects", manifest}}.dump(2) << "\n";
    if (!m) throw Error("cannot write manifest in " + dir.string());
}

std::vector<AsciiObject> read_objects(const std::filesystem::path& dir) {
    std::ifstream m(dir / "manifest.json");
    if (!m) throw Error("no manifest.json in " + dir.string());
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(m);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError((dir / "manifest.json").string(), e.what());
    }
    std::vector<AsciiObject> out;
    for (const auto& entry : manifest.at("objects")) {
        AsciiObject obj;
        obj.id = entry.at("id").get<std::string>();
        obj.label = label_from_string(entry.at("label").get<std::string>());
        for (const auto& p : entry.value("provenance", nlohmann::json::array()))
            obj.provenance.push_back({p.at("event").get<std::int64_t>(), p.at("recording").get<std::string>()});
        const auto file = dir / entry.at("file").get<std::string>();
        std::ifstream f(file, std::ios::binary);
        if (!f) throw Error("cannot read object file " + file.string());
        obj.bytes.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
        out.push_back(std::move(obj));
    }
    return out;
}

}  // namespace ncderp
