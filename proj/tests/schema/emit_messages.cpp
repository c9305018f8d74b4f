// Prints one JSON message per line: hand-written inbound samples, then every
// outbound message a short live session produces, then the remaining kinds.
#include <iostream>

#include "dex/service/engine_service.hpp"

using namespace dex;
using namespace dex::service;

int main() {
  std::cout << R"({"type":"hello","role":"ui"})" << '\n'
            << R"({"type":"input","t_us":10,"controller":"left","pose":{"p":[0,1,0],"q":[1,0,0,0]},"button":false,"jaw":0.5})"
            << '\n'
            << R"({"type":"trial","cmd":"start"})" << '\n'
            << R"({"type":"packet","hex":")" << to_hex(io::encode_packet(io::ControllerPacket{}))
            << "\"}\n"
            << R"({"type":"blobs","t_us":5,"markers":[{"left":[1,2],"right":[3,4]}]})" << '\n';

  ServiceConfig config;
  config.engine.scene.protocol.familiarization_s = 0.1;
  config.engine.scene.protocol.trial_s = 0.3;
  config.engine.scene.protocol.trials = 2;
  config.engine.scene.protocol.break_s = 0.1;
  EngineService svc(config);
  auto box = std::make_shared<Outbox>();
  ClientSession session;
  for (const char* text : {R"({"type":"hello","role":"ui"})", R"({"type":"trial","cmd":"start"})"}) {
    InboundResult r = handle_inbound(session, text, svc.context());
    for (auto& reply : r.replies) {
      box->push(reply);
    }
    if (r.joined) {
      svc.attach(box);
    }
    if (r.forward) {
      svc.submit(box, *r.forward);
    }
  }
  for (int k = 0; k < 100; ++k) {
    svc.step();
    while (auto m = box->pop()) {
      std::cout << *m << '\n';
    }
  }

  task::TrialReport report;
  report.transfers = 2;
  report.avg_transfer_time_s = 4.5;
  std::cout << metrics_message(report) << '\n'
            << event_message(20'000, task::Event{10'000, task::EventKind::Grasp, 1, 0, 3, 0.0})
            << '\n'
            << haptic_message(1, kDropPulseAmplitude, kDropPulseMs) << '\n'
            << error_message(ErrorCode::Order, "late") << '\n';
  return 0;
}
