// Copyright 2026 The Modelgate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MODELGATE_HTTP_SERVER_H_
#define MODELGATE_HTTP_SERVER_H_

#include <chrono>
#include <memory>
#include <string>

#include "modelgate/admin.h"
#include "modelgate/backend.h"
#include "modelgate/gateway.h"

namespace modelgate {

// Background HTTP listener. Start binds and returns the port; Stop (or the
// destructor) shuts the listener down and joins its thread.
class HttpService {
 public:
  HttpService();
  virtual ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // port 0 picks a free port. Throws kStorageFailure when binding fails.
  int Start(const std::string& host = "127.0.0.1", int port = 0);
  void Stop();
  int port() const { return port_; }
  std::string url() const;

  // Blocks serving on the calling thread.
  bool Run(const std::string& host, int port);

 protected:
  struct Impl;
  Impl& impl() { return *impl_; }

 private:
  std::unique_ptr<Impl> impl_;
  std::string host_;
  int port_ = 0;
};

// The gateway's wire surface: POST /v1/score, /v1/feedback, /v1/notify, and
// /admin/* when an AdminApi is given.
class GatewayServer : public HttpService {
 public:
  GatewayServer(Gateway& gateway, AdminApi* admin);
};

// Exposes any Backend with the model-microservice protocol. `delay` is a
// real sleep before each score reply.
class BackendServer : public HttpService {
 public:
  explicit BackendServer(std::shared_ptr<Backend> backend,
                         std::chrono::milliseconds delay = std::chrono::milliseconds(0));
};

}  // namespace modelgate

#endif  // MODELGATE_HTTP_SERVER_H_
