#include "mudra/harness/agent.hpp"

#include "mudra/net/client.hpp"

namespace mudra::harness {

KnottingResult scripted_knotting(const std::string &host, unsigned short port, const AgentPlan &plan,
                                 std::uint64_t budget_frames) {
  KnottingResult result;
  try {
    net::Client client(host, port);
    const auto welcome = client.hello("demo-agent", {HandSide::Left, HandSide::Right});
    const auto every = static_cast<std::uint64_t>(welcome.frame_rate);
    std::vector<Vec3> positions;
    for (std::uint64_t k = 0; k < budget_frames; ++k) {
      const auto in = plan.at(frame_time_ms(k, welcome.frame_rate));
      client.send(in[0]);
      client.send(in[1]);
      while (true) {
        auto msg = client.receive();
        if (auto *f = std::get_if<net::Frame>(&msg)) {
          positions = std::move(f->positions);
          break;
        }
      }
      if ((k + 1) % every == 0 || k + 1 == budget_frames) {
        result.report = knot::analyze_chain(positions);
        result.frames_used = k + 1;
        if (result.report.classification == knot::KnotClass::Trefoil) {
          result.success = true;
          break;
        }
      }
    }
    client.close();
  } catch (const net::ServerError &e) {
    throw HarnessError(std::string("server refused the agent: ") + e.what());
  } catch (const net::DecodeError &e) {
    throw HarnessError(std::string("bad message from server: ") + e.what());
  } catch (const HarnessError &) {
    throw;
  } catch (const std::runtime_error &e) {
    throw HarnessError(e.what());
  }
  return result;
}

} // namespace mudra::harness
