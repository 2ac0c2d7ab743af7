#pragma once

#include <optional>

namespace qi {

enum class Channel {
    Idler,         // lab-side reference detector
    SignalReturn,  // return detector, photon from the probe pair
    Noise,         // return detector, background photon
};

enum class TruthOrigin { Triplet, Background };

// What the decision logic is allowed to see. SignalReturn and Noise both
// arrive at the same return detector, so matchers may only distinguish
// Idler from non-Idler; the generation labels are diagnostics.
struct DetectionEvent {
    double arrival_time = 0.0;  // s
    double frequency = 0.0;     // rad/s
    Channel channel = Channel::Noise;
    std::optional<int> mode_index;  // 1-based signal mode; nullopt for background
};

// Full event record with the hidden provenance label. strip() is the only
// path into the decision layer.
struct PhotonEvent {
    DetectionEvent detection;
    TruthOrigin truth_origin = TruthOrigin::Background;

    DetectionEvent strip() const { return detection; }
};

}  // namespace qi
