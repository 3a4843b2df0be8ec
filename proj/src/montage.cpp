#include "ncderp/montage.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ncderp/error.hpp"
#include "ncderp/montage_data.hpp"

namespace ncderp {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

std::vector<ElectrodePosition> parse_montage_csv(const std::string& text) {
    std::vector<ElectrodePosition> out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("name", 0) == 0) continue;
        std::istringstream fields(line);
        ElectrodePosition pos;
        std::string x, y;
        if (!std::getline(fields, pos.name, ',') || !std::getline(fields, x, ',') ||
            !std::getline(fields, y, ','))
            throw FormatError("montage line " + std::to_string(line_no), "expected name,x,y");
        try {
            pos.x = std::stod(x);
            pos.y = std::stod(y);
        } catch (const std::exception&) {
            throw FormatError("montage line " + std::to_string(line_no), "bad coordinate");
        }
        out.push_back(std::move(pos));
    }
    return out;
}

std::vector<ElectrodePosition> read_montage(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open montage file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_montage_csv(buf.str());
}

const std::vector<ElectrodePosition>& standard_montage() {
    static const std::vector<ElectrodePosition> montage = parse_montage_csv(detail::kMontageCsv);
    return montage;
}

const ElectrodePosition& find_electrode(const std::vector<ElectrodePosition>& montage,
                                        const std::string& name) {
    const std::string key = lower(name);
    for (const auto& e : montage)
        if (lower(e.name) == key) return e;
    throw Error("unknown electrode '" + name + "' for scalp placement");
}

std::vector<std::string> default_channel_names(int count) {
    const auto& montage = standard_montage();
    if (count < 0 || count > static_cast<int>(montage.size()))
        throw Error("default montage provides at most " + std::to_string(montage.size()) +
                    " channel names");
    std::vector<std::size_t> order(montage.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ra = montage[a].x * montage[a].x + montage[a].y * montage[a].y;
        const auto rb = montage[b].x * montage[b].x + montage[b].y * montage[b].y;
        return ra < rb;
    });
    std::vector<std::string> names;
    for (int i = 0; i < count; ++i) names.push_back(montage[order[i]].name);
    return names;
}

}  // namespace ncderp
