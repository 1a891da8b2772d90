/**
 * Entry point. Configuration via environment:
 *
 *   PORT            listen port (default 8010)
 *   MODEL_SIZE      small | medium | large (default small; informational
 *                   for the builtin synth, passed to the bridge command)
 *   MAX_DURATION_S  request duration limit (default 120)
 *   MODEL_CMD       optional external generator command; when set, requests
 *                   are served by that command instead of the builtin synth
 */

import { BuiltinModel, CommandModel } from "./model";
import { createServer } from "./server";

function main(): void {
  const port = Number(process.env.PORT ?? 8010);
  const size = process.env.MODEL_SIZE ?? "small";
  const maxDurationS = Number(process.env.MAX_DURATION_S ?? 120);
  const command = process.env.MODEL_CMD;

  const model = command
    ? new CommandModel(command, `musicgen-${size}`)
    : new BuiltinModel(`builtin-${size}`);

  const app = createServer({ model, maxDurationS });
  app.listen(port, () => {
    console.log(
      `musicgen-service listening on :${port} (model=${model.name}, ` +
      `max ${maxDurationS} s)`
    );
  });
}

main();
