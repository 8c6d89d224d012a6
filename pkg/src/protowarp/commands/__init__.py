COMMANDS = {
    "preprocess": "protowarp.commands.preprocess",
    "screen": "protowarp.commands.screen",
    "build": "protowarp.commands.build",
    "diagnose": "protowarp.commands.diagnose",
    "evaluate": "protowarp.commands.evaluate",
    "plot": "protowarp.commands.plot",
}
