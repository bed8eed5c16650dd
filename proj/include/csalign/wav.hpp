#pragma once

// Minimal RIFF/WAVE reader and writer, PCM16 only. Enough to cut and
// splice corpus audio without pulling in a media stack.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "csalign/errors.hpp"

namespace csalign {

struct WavData {
    int sample_rate = 16000;
    int channels = 1;
    std::vector<int16_t> samples;  // interleaved when channels > 1

    double duration() const {
        if (channels <= 0 || sample_rate <= 0) return 0.0;
        return static_cast<double>(samples.size() / channels) / sample_rate;
    }
};

namespace detail {

inline uint32_t read_u32le(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

inline uint16_t read_u16le(const unsigned char* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32le(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void put_u16le(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace detail

inline WavData read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UnreadableAudio(path, "cannot open file");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const size_t n = bytes.size();

    if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
        throw UnreadableAudio(path, "not a RIFF/WAVE file");
    }

    WavData wav;
    bool have_fmt = false;
    bool have_data = false;
    size_t off = 12;
    while (off + 8 <= n) {
        char tag[5] = {0};
        std::memcpy(tag, p + off, 4);
        const uint32_t size = detail::read_u32le(p + off + 4);
        const size_t body = off + 8;
        if (body + size > n) throw UnreadableAudio(path, "truncated chunk");

        if (std::memcmp(tag, "fmt ", 4) == 0) {
            if (size < 16) throw UnreadableAudio(path, "fmt chunk too small");
            const uint16_t format = detail::read_u16le(p + body);
            const uint16_t channels = detail::read_u16le(p + body + 2);
            const uint32_t rate = detail::read_u32le(p + body + 4);
            const uint16_t bits = detail::read_u16le(p + body + 14);
            if (format != 1 || bits != 16) {
                throw UnreadableAudio(path, "only PCM16 is supported");
            }
            if (channels == 0) throw UnreadableAudio(path, "zero channels");
            wav.channels = channels;
            wav.sample_rate = static_cast<int>(rate);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            wav.samples.resize(size / 2);
            std::memcpy(wav.samples.data(), p + body, wav.samples.size() * 2);
            have_data = true;
        }
        off = body + size + (size & 1);  // chunks are word-aligned
    }
    if (!have_fmt || !have_data) throw UnreadableAudio(path, "missing fmt or data chunk");
    return wav;
}

inline void write_wav(const std::string& path, const WavData& wav) {
    const uint32_t data_bytes = static_cast<uint32_t>(wav.samples.size() * 2);
    const uint16_t channels = static_cast<uint16_t>(wav.channels);
    const uint32_t rate = static_cast<uint32_t>(wav.sample_rate);
    const uint32_t byte_rate = rate * channels * 2;
    const uint16_t block_align = channels * 2;

    std::string out;
    out.reserve(44 + data_bytes);
    out += "RIFF";
    detail::put_u32le(out, 36 + data_bytes);
    out += "WAVE";
    out += "fmt ";
    detail::put_u32le(out, 16);
    detail::put_u16le(out, 1);  // PCM
    detail::put_u16le(out, channels);
    detail::put_u32le(out, rate);
    detail::put_u32le(out, byte_rate);
    detail::put_u16le(out, block_align);
    detail::put_u16le(out, 16);
    out += "data";
    detail::put_u32le(out, data_bytes);
    out.append(reinterpret_cast<const char*>(wav.samples.data()), data_bytes);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw UnreadableAudio(path, "cannot open file for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw UnreadableAudio(path, "short write");
}

// Concatenates PCM16 files in order, inserting gap_ms of silence between
// consecutive pieces. All inputs must agree on sample rate and channel
// count; the error names the first offending file.
inline double concat_audio(const std::vector<std::string>& paths, int gap_ms,
                           const std::string& out_path) {
    if (paths.empty()) throw UnreadableAudio(out_path, "no input files");

    WavData joined;
    bool first = true;
    for (const auto& path : paths) {
        WavData piece = read_wav(path);
        if (first) {
            joined.sample_rate = piece.sample_rate;
            joined.channels = piece.channels;
            first = false;
        } else {
            if (piece.sample_rate != joined.sample_rate) {
                throw SampleRateMismatch(path, joined.sample_rate, piece.sample_rate);
            }
            if (piece.channels != joined.channels) {
                throw ChannelMismatch(path, joined.channels, piece.channels);
            }
            const size_t gap_frames =
                static_cast<size_t>(joined.sample_rate) * gap_ms / 1000;
            joined.samples.insert(joined.samples.end(), gap_frames * joined.channels, 0);
        }
        joined.samples.insert(joined.samples.end(), piece.samples.begin(),
                              piece.samples.end());
    }
    write_wav(out_path, joined);
    return joined.duration();
}

}  // namespace csalign
