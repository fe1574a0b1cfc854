#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace ecprune {

enum class ActKind { Identity, PReLU, Tanh, ReLU };

// Per-layer activation. The PReLU negative-side slope is a single trainable
// scalar per layer; it is ignored by the other kinds.
struct Activation {
    ActKind kind = ActKind::Identity;
    double slope = 0.25;
};

inline bool act_has_slope(ActKind kind) { return kind == ActKind::PReLU; }

inline double act_value(const Activation& act, double a) {
    switch (act.kind) {
        case ActKind::Identity: return a;
        case ActKind::PReLU:    return a > 0.0 ? a : act.slope * a;
        case ActKind::Tanh:     return std::tanh(a);
        case ActKind::ReLU:     return a > 0.0 ? a : 0.0;
    }
    return a;
}

// Right derivative at the PReLU/ReLU kink (a == 0 gives 1).
inline double act_derivative(const Activation& act, double a) {
    switch (act.kind) {
        case ActKind::Identity: return 1.0;
        case ActKind::PReLU:    return a >= 0.0 ? 1.0 : act.slope;
        case ActKind::Tanh: {
            const double t = std::tanh(a);
            return 1.0 - t * t;
        }
        case ActKind::ReLU:     return a >= 0.0 ? 1.0 : 0.0;
    }
    return 1.0;
}

// d act(a) / d slope; nonzero only on the negative branch of PReLU.
inline double act_slope_derivative(const Activation& act, double a) {
    if (act.kind == ActKind::PReLU && a < 0.0) return a;
    return 0.0;
}

inline std::string act_name(ActKind kind) {
    switch (kind) {
        case ActKind::Identity: return "identity";
        case ActKind::PReLU:    return "prelu";
        case ActKind::Tanh:     return "tanh";
        case ActKind::ReLU:     return "relu";
    }
    return "identity";
}

inline ActKind act_from_name(const std::string& name) {
    if (name == "identity") return ActKind::Identity;
    if (name == "prelu") return ActKind::PReLU;
    if (name == "tanh") return ActKind::Tanh;
    if (name == "relu") return ActKind::ReLU;
    throw std::invalid_argument("unknown activation: " + name);
}

} // namespace ecprune
