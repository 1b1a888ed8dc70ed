#include "simba/log.hpp"

#include <iostream>
#include <utility>

namespace simba {

namespace {
WarningSink& sink() {
    static WarningSink s;
    return s;
}
}  // namespace

WarningSink set_warning_sink(WarningSink s) { return std::exchange(sink(), std::move(s)); }

void warn(const std::string& message) {
    if (sink()) {
        sink()(message);
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

}  // namespace simba
