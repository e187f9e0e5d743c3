from django.apps import AppConfig


class AttributeAppConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'attribute_app'
    verbose_name = 'Attribute dictionary learning'
