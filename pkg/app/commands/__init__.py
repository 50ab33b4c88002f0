from app.commands import calibrate_commands, data_commands, eval_commands, mask_commands, train_commands

COMMAND_MODULES = [data_commands, train_commands, calibrate_commands, eval_commands, mask_commands]

__all__ = ["COMMAND_MODULES"]
