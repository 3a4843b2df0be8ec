#include <bit>
#include <fstream>
#include <sstream>

#include "ncderp/dsp.hpp"
#include "ncderp/error.hpp"

namespace ncderp {

namespace {

constexpr std::string_view kSegMagic = "ERPSEG v1";

bool has_reserved(const std::string& s) { return s.find_first_of(",\n\r") != std::string::npos; }

}  // namespace

void write_segments(const std::vector<Segment>& segments, const std::filesystem::path& path) {
    const std::size_t window = segments.empty() ? 0 : segments.front().values.size();
    std::string out;
    out += kSegMagic;
    out += "; window=" + std::to_string(window) + "; segments=" + std::to_string(segments.size()) + "\n";
    for (const auto& s : segments) {
        if (s.values.size() != window) throw Error("segments differ in length");
        if (has_reserved(s.channel.name) || has_reserved(s.origin.recording_id))
            throw Error("segment channel or recording id contains a reserved character");
        out += s.channel.name + "," + std::to_string(s.channel.index) + "," + to_string(s.label) + "," +
               std::to_string(s.origin.event_index) + "," + s.origin.recording_id + "\n";
    }
    out += "---\n";
    for (const auto& s : segments)
        for (double v : s.values) {
            const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(v));
            for (int b = 0; b < 4; ++b) out += static_cast<char>((u >> (8 * b)) & 0xFF);
        }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw Error("I/O failure writing " + path.string());
}

std::vector<Segment> read_segments(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const std::string file = path.string();
    std::size_t pos = 0;
    std::size_t line_no = 0;
    auto next_line = [&]() {
        ++line_no;
        const auto nl = data.find('\n', pos);
        if (nl == std::string::npos)
            throw FormatError(file + ":" + std::to_string(line_no), "unexpected end of file");
        std::string line = data.substr(pos, nl - pos);
        pos = nl + 1;
        return line;
    };
    auto where = [&] { return file + ":" + std::to_string(line_no); };

    std::size_t window = 0, count = 0;
    {
        const std::string header = next_line();
        if (header.rfind(kSegMagic, 0) != 0) throw FormatError(where(), "missing 'ERPSEG v1' magic");
        if (std::sscanf(header.c_str(), "ERPSEG v1; window=%zu; segments=%zu", &window, &count) != 2)
            throw FormatError(where(), "malformed segments header");
    }
    std::vector<Segment> out(count);
    for (auto& s : out) {
        std::istringstream in(next_line());
        std::string name, index, label, event, rid;
        if (!std::getline(in, name, ',') || !std::getline(in, index, ',') || !std::getline(in, label, ',') ||
            !std::getline(in, event, ',') || !std::getline(in, rid))
            throw FormatError(where(), "segment record must be channel,index,label,event_index,recording_id");
        try {
            s.channel = {name, std::stoi(index)};
            s.label = label_from_string(label);
            s.origin = {std::stoll(event), rid};
        } catch (const std::exception& e) {
            throw FormatError(where(), e.what());
        }
    }
    if (next_line() != "---") throw FormatError(where(), "missing '---' separator");
    if (data.size() - pos != count * window * 4)
        throw FormatError(file + ": value block", "size does not match header");
    const auto* p = reinterpret_cast<const unsigned char*>(data.data() + pos);
    for (auto& s : out) {
        s.values.resize(window);
        for (auto& v : s.values) {
            std::uint32_t u = 0;
            for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(p[b]) << (8 * b);
            v = std::bit_cast<float>(u);
            p += 4;
        }
    }
    return out;
}

}  // namespace ncderp
