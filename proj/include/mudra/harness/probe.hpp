#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mudra::harness {

struct LatencySummary {
  std::size_t samples = 0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;
};

/// Nearest-rank percentiles of the samples (milliseconds).
LatencySummary summarize(std::vector<double> samples_ms);

struct ProbeReport {
  int clients = 0;
  double duration_s = 0.0;
  int frame_rate = 0;
  /// Connect + hello until the first frame arrives.
  LatencySummary hello_to_first_frame;
  /// Pinch closed on the wire until a frame shows that hand's grab.
  LatencySummary input_to_reflection;
  std::uint64_t frames_received = 0;
  /// Missing ids between consecutive frames, summed over clients.
  std::uint64_t frame_gaps = 0;
  /// Frames whose id did not increase.
  std::uint64_t out_of_order = 0;
  std::uint64_t decode_errors = 0;
  std::uint64_t connection_errors = 0;
  std::uint64_t server_errors = 0;

  bool clean() const { return frame_gaps == 0 && out_of_order == 0 && decode_errors == 0 && connection_errors == 0; }
};

/// Connects n clients for `duration`. Client 0 claims the left hand and
/// client 1 the right; they pinch and release once a second to measure how
/// fast a grab is reflected in the broadcast. Further clients observe.
ProbeReport broadcast_latency_probe(const std::string &host, unsigned short port, int n_clients,
                                    std::chrono::duration<double> duration);

void write_probe_report(std::ostream &out, const ProbeReport &r);
std::string probe_report_json(const ProbeReport &r);

} // namespace mudra::harness
