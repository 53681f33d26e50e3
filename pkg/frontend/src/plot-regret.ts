#!/usr/bin/env node
import { main } from "./cli";

process.exit(main("plot-regret", process.argv.slice(2)));
