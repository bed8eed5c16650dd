#pragma once

#include <stdexcept>
#include <string>

namespace csalign {

// Base class for data-level failures. `row_id` carries the offending
// manifest/scoring row when the error surfaced during batch processing.
class Error : public std::runtime_error {
public:
    explicit Error(std::string kind, const std::string& msg, std::string row_id = "")
        : std::runtime_error(msg), kind_(std::move(kind)), row_id_(std::move(row_id)) {}

    const std::string& kind() const noexcept { return kind_; }
    const std::string& row_id() const noexcept { return row_id_; }

private:
    std::string kind_;
    std::string row_id_;
};

class EmptyReference : public Error {
public:
    explicit EmptyReference(const std::string& msg, std::string row_id = "")
        : Error("EmptyReference", msg, std::move(row_id)) {}
};

class TranslatorViolation : public Error {
public:
    explicit TranslatorViolation(const std::string& msg, std::string row_id = "")
        : Error("TranslatorViolation", msg, std::move(row_id)) {}
};

class DegenerateRejection : public Error {
public:
    explicit DegenerateRejection(const std::string& msg, std::string row_id = "")
        : Error("DegenerateRejection", msg, std::move(row_id)) {}
};

class SampleRateMismatch : public Error {
public:
    SampleRateMismatch(const std::string& file, int expected, int actual)
        : Error("SampleRateMismatch",
                file + ": expected " + std::to_string(expected) + " Hz, got " +
                    std::to_string(actual) + " Hz",
                file) {}
};

class ChannelMismatch : public Error {
public:
    ChannelMismatch(const std::string& file, int expected, int actual)
        : Error("ChannelMismatch",
                file + ": expected " + std::to_string(expected) + " channel(s), got " +
                    std::to_string(actual),
                file) {}
};

class UnreadableAudio : public Error {
public:
    UnreadableAudio(const std::string& file, const std::string& why)
        : Error("UnreadableAudio", file + ": " + why, file) {}
};

class EmptyPool : public Error {
public:
    explicit EmptyPool(const std::string& msg)
        : Error("EmptyPool", msg) {}
};

class ManifestMismatch : public Error {
public:
    explicit ManifestMismatch(const std::string& msg)
        : Error("ManifestMismatch", msg) {}
};

class TransportError : public Error {
public:
    explicit TransportError(const std::string& msg, std::string row_id = "")
        : Error("TransportError", msg, std::move(row_id)) {}
};

}  // namespace csalign
