#include "mvtl/log.hpp"

#include <iostream>
#include <mutex>

namespace mvtl::log {

namespace {

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

Sink& current_sink() {
    static Sink sink;
    return sink;
}

}  // namespace

Sink set_warning_sink(Sink sink) {
    std::lock_guard lock(sink_mutex());
    Sink previous = std::move(current_sink());
    current_sink() = std::move(sink);
    return previous;
}

void warn(const std::string& message) {
    std::lock_guard lock(sink_mutex());
    if (current_sink()) {
        current_sink()(message);
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

ScopedCapture::ScopedCapture() {
    previous_ = set_warning_sink([this](const std::string& m) { messages_.push_back(m); });
}

ScopedCapture::~ScopedCapture() {
    set_warning_sink(std::move(previous_));
}

bool ScopedCapture::contains(const std::string& needle) const {
    for (const auto& m : messages_) {
        if (m.find(needle) != std::string::npos) return true;
    }
    return false;
}

}  // namespace mvtl::log
