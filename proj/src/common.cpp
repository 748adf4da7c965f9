#include "c2rec/common.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace c2rec {

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("CCREC_LOG");
        if (env == nullptr || *env == '\0') return 1;
        if (std::strcmp(env, "quiet") == 0 || std::strcmp(env, "0") == 0) return 0;
        if (std::strcmp(env, "debug") == 0 || std::strcmp(env, "2") == 0) return 2;
        return 1;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::fprintf(stderr, "[c2rec] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::fprintf(stderr, "[c2rec:debug] %s\n", msg.c_str());
}

}  // namespace c2rec
