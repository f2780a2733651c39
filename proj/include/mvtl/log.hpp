#pragma once

#include <functional>
#include <string>
#include <vector>

namespace mvtl::log {

using Sink = std::function<void(const std::string&)>;

// Replaces the warning sink; returns the previous one. The default writes to
// stderr. Passing an empty function restores the default.
Sink set_warning_sink(Sink sink);

void warn(const std::string& message);

// Captures warnings for the lifetime of the object (tests, quiet runs).
class ScopedCapture {
public:
    ScopedCapture();
    ~ScopedCapture();
    ScopedCapture(const ScopedCapture&) = delete;
    ScopedCapture& operator=(const ScopedCapture&) = delete;

    const std::vector<std::string>& messages() const { return messages_; }
    bool contains(const std::string& needle) const;

private:
    std::vector<std::string> messages_;
    Sink previous_;
};

}  // namespace mvtl::log
