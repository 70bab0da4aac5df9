#include "mudra/harness/probe.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "mudra/net/client.hpp"

namespace mudra::harness {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

struct ClientTally {
  std::vector<double> hello_ms;
  std::vector<double> reflect_ms;
  std::uint64_t frames = 0;
  std::uint64_t gaps = 0;
  std::uint64_t out_of_order = 0;
  std::uint64_t decode_errors = 0;
  std::uint64_t connection_errors = 0;
  std::uint64_t server_errors = 0;
  int frame_rate = 0;
};

void run_client(const std::string &host, unsigned short port, int index, Clock::time_point deadline,
                ClientTally &tally) {
  const auto t0 = Clock::now();
  std::optional<HandSide> hand;
  if (index == 0) {
    hand = HandSide::Left;
  } else if (index == 1) {
    hand = HandSide::Right;
  }
  try {
    net::Client client(host, port);
    const auto welcome =
        client.hello("probe-" + std::to_string(index), hand ? std::vector<HandSide>{*hand} : std::vector<HandSide>{});
    tally.frame_rate = welcome.frame_rate;
    std::optional<std::uint64_t> last_id;
    std::optional<Vec3> aim;
    bool pinched = false;
    std::optional<Clock::time_point> pinch_sent;
    while (Clock::now() < deadline) {
      const auto text = client.receive_text();
      const auto now = Clock::now();
      net::Message msg;
      try {
        msg = net::decode(text);
      } catch (const net::DecodeError &) {
        ++tally.decode_errors;
        continue;
      }
      if (std::holds_alternative<net::ErrorMsg>(msg)) {
        ++tally.server_errors;
        continue;
      }
      const auto *frame = std::get_if<net::Frame>(&msg);
      if (!frame) {
        continue;
      }
      ++tally.frames;
      if (!last_id) {
        tally.hello_ms.push_back(ms_between(t0, now));
      } else if (frame->id <= *last_id) {
        ++tally.out_of_order;
      } else {
        tally.gaps += frame->id - *last_id - 1;
      }
      last_id = std::max(last_id.value_or(0), frame->id);
      if (!hand) {
        continue;
      }
      if (!aim && !frame->positions.empty()) {
        aim = frame->positions[index == 0 ? 0 : frame->positions.size() - 1];
      }
      if (pinch_sent) {
        for (const auto &g : frame->grabs) {
          if (g.hand == *hand) {
            tally.reflect_ms.push_back(ms_between(*pinch_sent, now));
            pinch_sent.reset();
            break;
          }
        }
      }
      // Half a second pinched, half a second open.
      const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(now - t0).count();
      const bool pinch = (elapsed / 500) % 2 == 1;
      HandInput in;
      in.hand = *hand;
      in.timestamp_ms = elapsed;
      in.pose.position = aim.value_or(Vec3{});
      in.pinch_index = pinch;
      if (pinch && !pinched) {
        pinch_sent = Clock::now();
      }
      if (!pinch) {
        pinch_sent.reset();
      }
      pinched = pinch;
      client.send(in);
    }
    client.close();
  } catch (const std::exception &) {
    ++tally.connection_errors;
  }
}

} // namespace

LatencySummary summarize(std::vector<double> samples) {
  LatencySummary s;
  s.samples = samples.size();
  if (samples.empty()) {
    return s;
  }
  std::sort(samples.begin(), samples.end());
  const auto rank = [&](double q) {
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size())));
    return samples[std::clamp<std::size_t>(k, 1, samples.size()) - 1];
  };
  s.p50_ms = rank(0.50);
  s.p95_ms = rank(0.95);
  s.max_ms = samples.back();
  return s;
}

ProbeReport broadcast_latency_probe(const std::string &host, unsigned short port, int n_clients,
                                    std::chrono::duration<double> duration) {
  if (n_clients < 1) {
    throw std::invalid_argument("the probe needs at least one client");
  }
  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(duration);
  std::vector<ClientTally> tallies(static_cast<std::size_t>(n_clients));
  std::vector<std::thread> threads;
  for (int i = 0; i < n_clients; ++i) {
    threads.emplace_back(run_client, host, port, i, deadline, std::ref(tallies[static_cast<std::size_t>(i)]));
  }
  for (auto &t : threads) {
    t.join();
  }
  ProbeReport r;
  r.clients = n_clients;
  r.duration_s = duration.count();
  std::vector<double> hello;
  std::vector<double> reflect;
  for (const auto &t : tallies) {
    hello.insert(hello.end(), t.hello_ms.begin(), t.hello_ms.end());
    reflect.insert(reflect.end(), t.reflect_ms.begin(), t.reflect_ms.end());
    r.frames_received += t.frames;
    r.frame_gaps += t.gaps;
    r.out_of_order += t.out_of_order;
    r.decode_errors += t.decode_errors;
    r.connection_errors += t.connection_errors;
    r.server_errors += t.server_errors;
    r.frame_rate = std::max(r.frame_rate, t.frame_rate);
  }
  r.hello_to_first_frame = summarize(std::move(hello));
  r.input_to_reflection = summarize(std::move(reflect));
  return r;
}

namespace {

nlohmann::json summary_json(const LatencySummary &s) {
  return {{"samples", s.samples}, {"p50_ms", s.p50_ms}, {"p95_ms", s.p95_ms}, {"max_ms", s.max_ms}};
}

void write_summary(std::ostream &out, const std::string &prefix, const LatencySummary &s) {
  out << prefix << ".samples = " << s.samples << '\n'
      << prefix << ".p50_ms = " << s.p50_ms << '\n'
      << prefix << ".p95_ms = " << s.p95_ms << '\n'
      << prefix << ".max_ms = " << s.max_ms << '\n';
}

} // namespace

void write_probe_report(std::ostream &out, const ProbeReport &r) {
  out << "clients = " << r.clients << '\n' << "duration_s = " << r.duration_s << '\n' << "frame_rate = " << r.frame_rate << '\n';
  write_summary(out, "hello_to_first_frame", r.hello_to_first_frame);
  write_summary(out, "input_to_reflection", r.input_to_reflection);
  out << "frames_received = " << r.frames_received << '\n'
      << "frame_gaps = " << r.frame_gaps << '\n'
      << "out_of_order = " << r.out_of_order << '\n'
      << "decode_errors = " << r.decode_errors << '\n'
      << "connection_errors = " << r.connection_errors << '\n'
      << "server_errors = " << r.server_errors << '\n';
}

std::string probe_report_json(const ProbeReport &r) {
  const nlohmann::json j = {{"clients", r.clients},
                            {"duration_s", r.duration_s},
                            {"frame_rate", r.frame_rate},
                            {"hello_to_first_frame", summary_json(r.hello_to_first_frame)},
                            {"input_to_reflection", summary_json(r.input_to_reflection)},
                            {"frames_received", r.frames_received},
                            {"frame_gaps", r.frame_gaps},
                            {"out_of_order", r.out_of_order},
                            {"decode_errors", r.decode_errors},
                            {"connection_errors", r.connection_errors},
                            {"server_errors", r.server_errors}};
  return j.dump();
}

} // namespace mudra::harness
