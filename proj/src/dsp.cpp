#include "ncderp/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "ncderp/error.hpp"
#include "ncderp/parallel.hpp"

namespace ncderp {

void validate(const FilterSpec& spec, int sample_rate_hz) {
    const double nyquist = sample_rate_hz / 2.0;
    if (!(spec.low_cut_hz > 0.0 && spec.low_cut_hz < spec.high_cut_hz && spec.high_cut_hz < nyquist))
        throw Error("cutoff outside Nyquist range: need 0 < low (" + std::to_string(spec.low_cut_hz) +
                    ") < high (" + std::to_string(spec.high_cut_hz) + ") < " + std::to_string(nyquist));
    if (spec.order < 2 || spec.order % 2 != 0)
        throw Error("band-pass order must be an even positive integer");
}

std::vector<Biquad> design_butterworth_bandpass(const FilterSpec& spec, int sample_rate_hz) {
    using cplx = std::complex<double>;
    validate(spec, sample_rate_hz);
    const int n = spec.order / 2;  // low-pass prototype order
    const double fs2 = 2.0 * sample_rate_hz;
    const double w1 = fs2 * std::tan(std::numbers::pi * spec.low_cut_hz / sample_rate_hz);
    const double w2 = fs2 * std::tan(std::numbers::pi * spec.high_cut_hz / sample_rate_hz);
    const double bw = w2 - w1;
    const double w0sq = w1 * w2;

    std::vector<cplx> poles;
    for (int k = 1; k <= n; ++k) {
        const cplx p = std::polar(1.0, std::numbers::pi * (2.0 * k + n - 1) / (2.0 * n));
        const cplx t = p * bw / 2.0;
        const cplx disc = std::sqrt(t * t - w0sq);
        poles.push_back(t + disc);
        poles.push_back(t - disc);
    }

    // Bilinear transform; the N zeros at s = 0 map to z = 1 and the N zeros
    // at infinity map to z = -1.
    cplx gain = std::pow(cplx(bw * fs2), n);
    std::vector<cplx> zpoles;
    for (const auto& s : poles) {
        gain /= (fs2 - s);
        zpoles.push_back((fs2 + s) / (fs2 - s));
    }

    constexpr double tiny = 1e-12;
    std::vector<cplx> complex_poles, real_poles;
    for (const auto& z : zpoles) {
        if (z.imag() > tiny) complex_poles.push_back(z);
        else if (std::abs(z.imag()) <= tiny) real_poles.emplace_back(z.real(), 0.0);
    }
    std::sort(real_poles.begin(), real_poles.end(),
              [](const cplx& a, const cplx& b) { return a.real() < b.real(); });

    std::vector<Biquad> sos;
    auto add_section = [&](cplx p1, cplx p2) {
        Biquad q;
        q.b = {1.0, 0.0, -1.0};
        q.a = {1.0, -(p1 + p2).real(), (p1 * p2).real()};
        sos.push_back(q);
    };
    for (const auto& p : complex_poles) add_section(p, std::conj(p));
    for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2) add_section(real_poles[i], real_poles[i + 1]);
    if (static_cast<int>(sos.size()) != n) throw Error("band-pass design produced an unpaired pole");
    for (auto& c : sos.front().b) c *= gain.real();
    return sos;
}

void apply_sos(std::span<const Biquad> sos, std::span<double> x) {
    for (const auto& q : sos) {
        double s1 = 0.0, s2 = 0.0;  // transposed direct form II state
        for (auto& v : x) {
            const double in = v;
            const double out = q.b[0] * in + s1;
            s1 = q.b[1] * in - q.a[1] * out + s2;
            s2 = q.b[2] * in - q.a[2] * out;
            v = out;
        }
    }
}

void filter_channel(std::span<const Biquad> sos, FilterMode mode, std::span<double> x) {
    apply_sos(sos, x);
    if (mode == FilterMode::forward_backward) {
        std::reverse(x.begin(), x.end());
        apply_sos(sos, x);
        std::reverse(x.begin(), x.end());
    }
}

Recording bandpass(Recording rec, const FilterSpec& spec) {
    const auto sos = design_butterworth_bandpass(spec, rec.sample_rate_hz);
    const auto n = static_cast<std::int64_t>(rec.samples.size());
#pragma omp parallel for num_threads(worker_count()) schedule(dynamic, 1)
    for (std::int64_t c = 0; c < n; ++c) filter_channel(sos, spec.mode, rec.samples[c]);
    return rec;
}

namespace serial {

Recording bandpass(Recording rec, const FilterSpec& spec) {
    const auto sos = design_butterworth_bandpass(spec, rec.sample_rate_hz);
    for (auto& ch : rec.samples) filter_channel(sos, spec.mode, ch);
    return rec;
}

}  // namespace serial

Recording standardize(Recording rec) {
    for (std::size_t c = 0; c < rec.samples.size(); ++c) {
        auto& x = rec.samples[c];
        const std::string& name = rec.channels[c].name;
        if (x.size() < 2) throw Error("channel '" + name + "' needs more than one sample to standardize");
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(x.size());
        double ss = 0.0;
        for (double v : x) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
        if (!(sd > 0.0) || !std::isfinite(sd)) throw Error("zero-variance channel '" + name + "'");
        for (auto& v : x) v = (v - mean) / sd;
    }
    return rec;
}

std::string to_string(Label label) { return label == Label::P300 ? "P300" : "NonP300"; }

Label label_from_string(const std::string& s) {
    if (s == "P300" || s == "1") return Label::P300;
    if (s == "NonP300" || s == "0") return Label::NonP300;
    throw Error("unknown label '" + s + "'");
}

std::string recording_id(const Recording& rec) {
    for (const char* key : {"id", "session"})
        if (auto it = rec.meta.find(key); it != rec.meta.end() && !it->second.empty()) return it->second;
    return "rec";
}

std::vector<Segment> extract_segments(const Recording& rec, const ChannelId& channel) {
    const std::size_t pos = rec.channel_position(channel.name);
    const std::size_t window = window_length(rec.sample_rate_hz);
    const auto& x = rec.samples[pos];
    const std::string rid = recording_id(rec);
    std::vector<Segment> out;
    out.reserve(rec.events.size());
    for (std::size_t e = 0; e < rec.events.size(); ++e) {
        const auto& ev = rec.events[e];
        if (ev.sample_index < 0 || static_cast<std::size_t>(ev.sample_index) + window > x.size())
            throw Error("window of event " + std::to_string(e) + " (sample " +
                        std::to_string(ev.sample_index) + ") overruns end of recording");
        Segment s;
        s.channel = rec.channels[pos];
        s.values.assign(x.begin() + ev.sample_index, x.begin() + ev.sample_index + static_cast<std::ptrdiff_t>(window));
        s.label = ev.is_target ? Label::P300 : Label::NonP300;
        s.origin = {static_cast<std::int64_t>(e), rid};
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace ncderp
