#include "ncderp/recording.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "ncderp/error.hpp"
#include "ncderp/montage.hpp"
#include "ncderp/parallel.hpp"

namespace ncderp {

const ChannelId& Recording::channel(const std::string& name) const {
    return channels[channel_position(name)];
}

std::size_t Recording::channel_position(const std::string& name) const {
    for (std::size_t i = 0; i < channels.size(); ++i)
        if (channels[i].name == name) return i;
    throw Error("recording has no channel '" + name + "'");
}

void validate(const Recording& rec) {
    if (rec.sample_rate_hz <= 0) throw Error("sample_rate_hz must be positive");
    if (rec.samples.size() != rec.channels.size())
        throw Error("channel list and sample matrix disagree on channel count");
    std::set<std::string> names;
    for (std::size_t i = 0; i < rec.channels.size(); ++i) {
        const auto& ch = rec.channels[i];
        if (ch.name.empty()) throw Error("channel " + std::to_string(i) + " has an empty name");
        if (ch.name.find_first_of(",;\n") != std::string::npos)
            throw Error("channel name '" + ch.name + "' contains a reserved character");
        if (!names.insert(ch.name).second) throw Error("duplicate channel name '" + ch.name + "'");
        if (ch.index != static_cast<int>(i))
            throw Error("channel '" + ch.name + "' index is not dense");
        if (rec.samples[i].size() != rec.sample_count())
            throw Error("channel '" + ch.name + "' has inconsistent sample count");
    }
    const auto n = static_cast<std::int64_t>(rec.sample_count());
    for (std::size_t e = 0; e < rec.events.size(); ++e) {
        const auto& ev = rec.events[e];
        if (ev.sample_index < 0 || ev.sample_index >= n)
            throw Error("event " + std::to_string(e) + " out of range");
        if (e > 0 && ev.sample_index <= rec.events[e - 1].sample_index)
            throw Error("event " + std::to_string(e) + " is not strictly after its predecessor");
        if (ev.stimulus_code < 1 || ev.stimulus_code > 12)
            throw Error("event " + std::to_string(e) + " has stimulus code outside 1..12");
    }
}

void validate(const SynthesisConfig& cfg) {
    if (cfg.n_characters < 1) throw Error("n_characters must be >= 1");
    if (cfg.repeats_per_character < 1) throw Error("repeats_per_character must be >= 1");
    if (cfg.n_channels < 1) throw Error("n_channels must be >= 1");
    if (cfg.sample_rate_hz <= 0) throw Error("sample_rate_hz must be positive");
    if (!(cfg.snr > 0.0)) throw Error("snr must be positive");
    if (!(cfg.noise_sd > 0.0)) throw Error("noise_sd must be positive");
    if (!(cfg.p300_latency_ms > 0.0) || !(cfg.p300_width_ms > 0.0))
        throw Error("P300 latency and width must be positive");
    if (cfg.p300_latency_ms + cfg.p300_width_ms > 600.0)
        throw Error("P300 latency + width must fit inside the 600 ms window");
    if (cfg.gap_samples < 0) throw Error("gap_samples must be >= 0");
    if (!cfg.channel_gain.empty()) {
        if (cfg.channel_gain.size() != static_cast<std::size_t>(cfg.n_channels))
            throw Error("channel_gain must have one entry per channel");
        for (double g : cfg.channel_gain)
            if (!(g >= 0.0 && g <= 1.0)) throw Error("channel_gain entries must lie in [0, 1]");
    }
    if (!cfg.channel_names.empty() &&
        cfg.channel_names.size() != static_cast<std::size_t>(cfg.n_channels))
        throw Error("channel_names must have one entry per channel");
}

Recording synthesize(const SynthesisConfig& cfg) {
    validate(cfg);
    Recording rec;
    rec.sample_rate_hz = cfg.sample_rate_hz;
    const auto names = cfg.channel_names.empty() ? default_channel_names(cfg.n_channels)
                                                 : cfg.channel_names;
    for (int i = 0; i < cfg.n_channels; ++i) rec.channels.push_back({names[i], i});

    const std::size_t window = window_length(cfg.sample_rate_hz);
    const std::size_t spacing = window + static_cast<std::size_t>(cfg.gap_samples);
    const std::size_t lead = static_cast<std::size_t>(cfg.sample_rate_hz);
    const std::size_t n_events =
        static_cast<std::size_t>(cfg.n_characters) * cfg.repeats_per_character * 12;
    const std::size_t n_samples = lead + n_events * spacing + lead;

    std::mt19937_64 layout_rng(derive_seed(cfg.rng_seed, "synth-events"));
    std::array<int, 12> codes{};
    std::iota(codes.begin(), codes.end(), 1);
    std::size_t onset = lead;
    for (int ch = 0; ch < cfg.n_characters; ++ch) {
        const int target_row = std::uniform_int_distribution<int>(1, 6)(layout_rng);
        const int target_col = std::uniform_int_distribution<int>(7, 12)(layout_rng);
        for (int rep = 0; rep < cfg.repeats_per_character; ++rep) {
            std::shuffle(codes.begin(), codes.end(), layout_rng);
            for (int code : codes) {
                rec.events.push_back({static_cast<std::int64_t>(onset), code,
                                      code == target_row || code == target_col});
                onset += spacing;
            }
        }
    }

    // Gaussian pulse sampled over one window, peak 1.
    const double sigma_s =
        cfg.p300_width_ms / (2.0 * std::sqrt(2.0 * std::log(2.0))) * cfg.sample_rate_hz / 1000.0;
    const double center_s = cfg.p300_latency_ms * cfg.sample_rate_hz / 1000.0;
    std::vector<double> pulse(window);
    for (std::size_t k = 0; k < window; ++k) {
        const double t = (static_cast<double>(k) - center_s) / sigma_s;
        pulse[k] = std::exp(-0.5 * t * t);
    }

    rec.samples.assign(cfg.n_channels, {});
#pragma omp parallel for num_threads(worker_count()) schedule(static)
    for (int c = 0; c < cfg.n_channels; ++c) {
        std::mt19937_64 rng(derive_seed(cfg.rng_seed, "synth-noise", static_cast<std::uint64_t>(c)));
        std::normal_distribution<double> noise(0.0, cfg.noise_sd);
        auto& x = rec.samples[c];
        x.resize(n_samples);
        for (auto& v : x) v = noise(rng);
        const double gain = cfg.channel_gain.empty() ? 1.0 : cfg.channel_gain[c];
        const double amplitude = cfg.snr * cfg.noise_sd * gain;
        for (const auto& ev : rec.events) {
            if (!ev.is_target) continue;
            for (std::size_t k = 0; k < window; ++k) x[ev.sample_index + k] += amplitude * pulse[k];
        }
        for (auto& v : x) v = static_cast<double>(static_cast<float>(v));
    }

    rec.meta["generator"] = "synthesize";
    rec.meta["seed"] = std::to_string(cfg.rng_seed);
    return rec;
}

// ---------------------------------------------------------------------------
// Container format

namespace {

constexpr std::string_view kMagic = "ERPREC v1";

std::string escape_meta(const std::string& s) {
    std::string out;
    for (unsigned char c : s) {
        if (c == '%' || c == ';' || c == '=' || c == '\n' || c == '\r' || c < 0x20) {
            static constexpr char hex[] = "0123456789ABCDEF";
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 15];
        } else {
            out += static_cast<char>(c);
        }
    }
    return out;
}

std::string unescape_meta(const std::string& s, const std::string& where) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '%') {
            out += s[i];
            continue;
        }
        if (i + 2 >= s.size())
            throw FormatError(where, "truncated escape in meta value");
        try {
            out += static_cast<char>(std::stoi(s.substr(i + 1, 2), nullptr, 16));
        } catch (const std::exception&) {
            throw FormatError(where, "bad escape in meta value");
        }
        i += 2;
    }
    return out;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::int64_t parse_int(const std::string& s, const std::string& where, const char* field) {
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size())
        throw FormatError(where, std::string("malformed ") + field + " '" + s + "'");
    return v;
}

void put_f32(std::string& out, float f) {
    const auto u = std::bit_cast<std::uint32_t>(f);
    for (int b = 0; b < 4; ++b) out += static_cast<char>((u >> (8 * b)) & 0xFF);
}

float get_f32(const unsigned char* p) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(p[b]) << (8 * b);
    return std::bit_cast<float>(u);
}

}  // namespace

void write_recording(const Recording& rec, const std::filesystem::path& path) {
    validate(rec);
    std::string out;
    out += kMagic;
    out += "; rate=" + std::to_string(rec.sample_rate_hz) + "; channels=";
    for (std::size_t i = 0; i < rec.channels.size(); ++i) {
        if (i) out += ',';
        out += rec.channels[i].name;
    }
    out += "; samples=" + std::to_string(rec.sample_count());
    out += "; events=" + std::to_string(rec.events.size());
    for (const auto& [k, v] : rec.meta) out += "; meta." + escape_meta(k) + "=" + escape_meta(v);
    out += '\n';
    for (const auto& ev : rec.events)
        out += std::to_string(ev.sample_index) + "," + std::to_string(ev.stimulus_code) + "," +
               (ev.is_target ? "1" : "0") + "\n";
    out += "---\n";
    out.reserve(out.size() + rec.channels.size() * rec.sample_count() * 4);
    for (const auto& ch : rec.samples)
        for (double v : ch) put_f32(out, static_cast<float>(v));

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw Error("I/O failure writing " + path.string());
}

Recording read_recording(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const std::string file = path.string();
    auto where = [&](std::size_t line) { return file + ":" + std::to_string(line); };

    std::size_t pos = 0;
    auto next_line = [&](std::size_t line_no) {
        const auto nl = data.find('\n', pos);
        if (nl == std::string::npos) throw FormatError(where(line_no), "unexpected end of file");
        std::string line = data.substr(pos, nl - pos);
        pos = nl + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };

    Recording rec;
    const std::string header = next_line(1);
    std::vector<std::string> fields;
    {
        std::istringstream in(header);
        std::string part;
        while (std::getline(in, part, ';')) fields.push_back(trim(part));
    }
    if (fields.empty() || fields[0] != kMagic)
        throw FormatError(where(1), "malformed header: missing 'ERPREC v1' magic");
    std::map<std::string, std::string> kv;
    for (std::size_t i = 1; i < fields.size(); ++i) {
        const auto eq = fields[i].find('=');
        if (eq == std::string::npos)
            throw FormatError(where(1), "malformed header field '" + fields[i] + "'");
        const auto key = fields[i].substr(0, eq);
        const auto value = fields[i].substr(eq + 1);
        if (key.rfind("meta.", 0) == 0)
            rec.meta[unescape_meta(key.substr(5), where(1))] = unescape_meta(value, where(1));
        else
            kv[key] = value;
    }
    for (const char* required : {"rate", "channels", "samples", "events"})
        if (!kv.contains(required))
            throw FormatError(where(1), std::string("malformed header: missing '") + required + "'");

    rec.sample_rate_hz = static_cast<int>(parse_int(kv["rate"], where(1), "rate"));
    if (rec.sample_rate_hz <= 0) throw FormatError(where(1), "rate must be positive");
    {
        std::istringstream in(kv["channels"]);
        std::string name;
        int idx = 0;
        while (std::getline(in, name, ',')) rec.channels.push_back({trim(name), idx++});
    }
    const auto n_samples = parse_int(kv["samples"], where(1), "samples");
    const auto n_events = parse_int(kv["events"], where(1), "events");
    if (n_samples < 0 || n_events < 0) throw FormatError(where(1), "negative count");

    for (std::int64_t e = 0; e < n_events; ++e) {
        const std::size_t line_no = static_cast<std::size_t>(e) + 2;
        const std::string line = next_line(line_no);
        std::istringstream in(line);
        std::string a, b, c, extra;
        if (!std::getline(in, a, ',') || !std::getline(in, b, ',') || !std::getline(in, c, ',') ||
            std::getline(in, extra, ','))
            throw FormatError(where(line_no), "event record must be sample_index,stimulus_code,is_target");
        StimulusEvent ev;
        ev.sample_index = parse_int(trim(a), where(line_no), "sample_index");
        ev.stimulus_code = static_cast<int>(parse_int(trim(b), where(line_no), "stimulus_code"));
        const auto t = trim(c);
        if (t != "0" && t != "1") throw FormatError(where(line_no), "is_target must be 0 or 1");
        ev.is_target = t == "1";
        if (ev.sample_index < 0 || ev.sample_index >= n_samples)
            throw FormatError(where(line_no), "event out of range");
        if (ev.stimulus_code < 1 || ev.stimulus_code > 12)
            throw FormatError(where(line_no), "stimulus code outside 1..12");
        if (!rec.events.empty() && ev.sample_index <= rec.events.back().sample_index)
            throw FormatError(where(line_no), "event sample indices must be strictly increasing");
        rec.events.push_back(ev);
    }
    const std::size_t sep_line = static_cast<std::size_t>(n_events) + 2;
    if (next_line(sep_line) != "---") throw FormatError(where(sep_line), "missing '---' separator");

    const std::size_t expected = rec.channels.size() * static_cast<std::size_t>(n_samples) * 4;
    const std::size_t available = data.size() - pos;
    if (available != expected)
        throw FormatError(file + ": sample block",
                          "inconsistent channel lengths: expected " + std::to_string(expected) +
                              " bytes, found " + std::to_string(available));
    const auto* p = reinterpret_cast<const unsigned char*>(data.data() + pos);
    rec.samples.assign(rec.channels.size(), std::vector<double>(static_cast<std::size_t>(n_samples)));
    for (auto& ch : rec.samples)
        for (auto& v : ch) {
            v = get_f32(p);
            p += 4;
        }
    try {
        validate(rec);
    } catch (const Error& e) {
        throw FormatError(file, e.what());
    }
    return rec;
}

}  // namespace ncderp
